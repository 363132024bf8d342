// Output shaped like a benchmark report: result lines plus timing lines
// that differ between otherwise identical runs.
#include <stdio.h>
#include <time.h>

int main(void) {
  struct timespec a, b;
  clock_gettime(CLOCK_MONOTONIC, &a);
  double x = 0.0;
  for (long i = 1; i <= NAS_ITERS; ++i) x += 1.0 / ((double)i * (double)i);
  clock_gettime(CLOCK_MONOTONIC, &b);
  const double t = (double)(b.tv_sec - a.tv_sec) + 1e-9 * (double)(b.tv_nsec - a.tv_nsec);
  printf(" Zeta(2) partial sum   = %.12f\n", x);
  printf(" Verification          = %s\n", x > 1.6449 ? "SUCCESSFUL" : "UNSUCCESSFUL");
  printf(" Time in seconds       = %.6f\n", t);
  printf(" Mop/s total           = %.2f\n", NAS_ITERS / t / 1e6);
  printf(" Compile date          = %s %s\n", __DATE__, __TIME__);
  return 0;
}
