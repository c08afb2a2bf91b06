#!/usr/bin/env python3
"""Convert flat gate-level Verilog (primitive gates, assigns, DFF cells) to BENCH.

Handles the netlist dialect shipped with the `circuitgraph` package:
primitive instances `nand g1 (out, a, b);`, `assign x = y;`, `assign x = 1'b0;`,
and flip-flop cells `ff name(.CK(clk), .D(d), .Q(q));` / `fflopd ...`.
Clock nets that only feed flip-flops are dropped.

usage: verilog_to_bench.py IN.v OUT.bench
"""
import re
import sys

PRIMS = {
    "and": "AND", "nand": "NAND", "or": "OR", "nor": "NOR",
    "xor": "XOR", "xnor": "XNOR", "not": "NOT", "buf": "BUFF",
}
FF_CELLS = {"ff", "fflopd", "dff"}


def statements(text):
    text = re.sub(r"//.*", "", text)
    text = re.sub(r"/\*.*?\*/", "", text, flags=re.S)
    # keep only the first (top) module
    body = text.split("endmodule")[0]
    for stmt in body.split(";"):
        stmt = " ".join(stmt.split())
        if stmt:
            yield stmt


def names(s):
    return [n.strip() for n in s.split(",") if n.strip()]


def convert(text):
    inputs, outputs, lines, ff_clocks = [], [], [], set()
    for stmt in statements(text):
        head = stmt.split(" ", 1)[0]
        if head == "module":
            continue
        if head == "input":
            inputs += names(stmt[len("input"):])
        elif head == "output":
            outputs += names(stmt[len("output"):])
        elif head in ("wire", "reg"):
            continue
        elif head == "assign":
            lhs, rhs = [p.strip() for p in stmt[len("assign"):].split("=", 1)]
            if rhs in ("1'b0", "1'h0"):
                lines.append(f"{lhs} = CONST0()")
            elif rhs in ("1'b1", "1'h1"):
                lines.append(f"{lhs} = CONST1()")
            else:
                lines.append(f"{lhs} = BUFF({rhs})")
        elif head in PRIMS:
            m = re.match(r"\w+\s*(?:\w+)?\s*\((.*)\)$", stmt)
            ports = names(m.group(1))
            lines.append(f"{ports[0]} = {PRIMS[head]}({', '.join(ports[1:])})")
        elif head in FF_CELLS:
            conns = dict(re.findall(r"\.(\w+)\s*\(\s*([^)\s]+)\s*\)", stmt))
            ff_clocks.add(conns["CK"])
            lines.append(f"{conns['Q']} = DFF({conns['D']})")
        else:
            raise SystemExit(f"unsupported statement: {stmt}")
    used = set()
    for ln in lines:
        used.update(names(ln.split("(", 1)[1].rstrip(")")))
    inputs = [i for i in inputs if not (i in ff_clocks and i not in used)]
    out = [f"INPUT({i})" for i in inputs]
    out += [f"OUTPUT({o})" for o in outputs]
    out += lines
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    src, dst = sys.argv[1], sys.argv[2]
    with open(src) as f:
        bench = convert(f.read())
    with open(dst, "w") as f:
        f.write(bench)
