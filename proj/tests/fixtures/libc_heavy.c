// Most of the time is spent inside the C runtime's strlen.
#include <stdio.h>
#include <string.h>

static char text[4096];

int main(void) {
  memset(text, 'a', sizeof text - 1);
  char* volatile p = text;
  unsigned long total = 0;
  for (long i = 0; i < LIBC_ITERS; ++i) total += strlen(p);
  printf("%lu\n", total);
  return 0;
}
