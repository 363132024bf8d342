#!/usr/bin/env python3
"""Regenerate pool_oracle.inc from the capstone disassembler.

Register facts come from capstone's operand list (explicit, including
memory base/index registers) and its regs_read/regs_write lists
(implicit). Pool rules are applied here independently of the C++ code.

    pip install capstone==5.0.7
    python3 tests/oracle/gen_pool_oracle.py > tests/oracle/pool_oracle.inc
"""
import re
import sys

from capstone import CS_AC_READ, CS_AC_WRITE, CS_ARCH_X86, CS_MODE_64, Cs
from capstone import x86

CORPUS = [
    "48 01 d8",
    "48 11 d1",
    "48 83 ec 10",
    "83 f8 01",
    "48 85 ff",
    "ff c1",
    "49 ff c8",
    "48 0f af c3",
    "48 0f 44 c1",
    "0f 94 c0",
    "31 c0",
    "48 d3 e2",
    "48 f7 de",
    "41 0f c9",
    "48 8b 43 08",
    "89 37",
    "48 8d 05 10 00 00 00",
    "0f b6 06",
    "48 63 c7",
    "b8 2a 00 00 00",
    "88 dc",
    "90",
    "75 fe",
    "55",
    "5b",
    "e8 f7 ff ff ff",
    "c3",
    "ff e0",
    "c9",
    "48 f7 f1",
    "48 92",
    "f2 0f 58 c1",
    "0f 28 ca",
    "f3 48 ab",
    "c5 f5 ef c2",
    "c4 e2 f1 f7 c3",
    "f3 0f 1e fa",
    "e2 d5",
    "4d 89 d3",
    "49 8b 04 24",
    "48 ff c9",
]

MASKS = ["we", "rwe", "rwei", "rweic", "rweico"]

CONTROL_GROUPS = {x86.X86_GRP_JUMP, x86.X86_GRP_CALL, x86.X86_GRP_RET, x86.X86_GRP_IRET,
                  x86.X86_GRP_BRANCH_RELATIVE}

GPR = set()
for base in ["ax", "cx", "dx", "bx", "sp", "bp", "si", "di"]:
    GPR |= {"r" + base, "e" + base, base}
GPR |= {"al", "cl", "dl", "bl", "ah", "ch", "dh", "bh", "spl", "bpl", "sil", "dil"}
for n in range(8, 16):
    GPR |= {"r%d" % n, "r%dd" % n, "r%dw" % n, "r%db" % n}


def canon(name):
    if name in ("eflags", "rflags", "flags"):
        return "rflags"
    if name in ("rip", "eip"):
        return "rip"
    if name in GPR:
        return name
    m = re.fullmatch(r"[xy]mm(\d+)", name)
    if m and int(m.group(1)) < 16:
        return name
    return None


def accesses(insn):
    """List of (name, read, written, explicit)."""
    out = {}

    def add(name, r, w, e):
        name = canon(name)
        if name is None:
            return
        cur = out.setdefault((name, e), [False, False])
        cur[0] |= r
        cur[1] |= w

    for op in insn.operands:
        if op.type == x86.X86_OP_REG:
            add(insn.reg_name(op.reg), bool(op.access & CS_AC_READ),
                bool(op.access & CS_AC_WRITE), True)
        elif op.type == x86.X86_OP_MEM:
            for r in (op.mem.base, op.mem.index):
                if r:
                    add(insn.reg_name(r), True, False, True)
    for r in insn.regs_read:
        add(insn.reg_name(r), True, False, False)
    for r in insn.regs_write:
        add(insn.reg_name(r), False, True, False)
    return [(n, rw[0], rw[1], e) for (n, e), rw in out.items()]


def pool(insn, mask):
    """Mapping register name -> set of admissible phases."""
    res = {}
    for name, r, w, e in accesses(insn):
        if name == "rip":
            continue
        if (e and "e" not in mask) or (not e and "i" not in mask):
            continue
        by_r = r and "r" in mask
        by_w = w and "w" in mask
        phases = set()
        if by_r and by_w:
            phases = {"pre", "post"}
        elif by_r:
            phases = {"pre"}
        elif by_w:
            phases = {"post"}
        if phases:
            res.setdefault(name, set()).update(phases)
    control = any(g in CONTROL_GROUPS for g in insn.groups)
    if "o" in mask or ("c" in mask and control):
        res.setdefault("rip", set()).add("post")
    return res


def render(p):
    parts = []
    for name in sorted(p):
        ph = p[name]
        parts.append("%s:%s" % (name, "pre|post" if len(ph) == 2 else next(iter(ph))))
    return " ".join(parts)


def main():
    md = Cs(CS_ARCH_X86, CS_MODE_64)
    md.detail = True
    w = sys.stdout.write
    w("// Generated by gen_pool_oracle.py from capstone; do not edit.\n")
    w("// {text, bytes, mask, expected pool}\n")
    for hx in CORPUS:
        code = bytes(int(b, 16) for b in hx.split())
        insns = list(md.disasm(code, 0x1000))
        assert len(insns) == 1 and insns[0].size == len(code), hx
        insn = insns[0]
        text = (insn.mnemonic + " " + insn.op_str).strip()
        for mask in MASKS:
            w('{"%s", "%s", "%s", "%s"},\n' % (text, hx, mask, render(pool(insn, mask))))


if __name__ == "__main__":
    main()
