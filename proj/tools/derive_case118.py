#!/usr/bin/env python3
"""Derive data/case118_fdi.m from the standard MATPOWER case118.

The published IEEE 118-bus data carries no usable thermal ratings
(rateA = 9900) and lists 54 generator rows, 35 of which are synchronous
condensers with zero real output. This script produces the variant used
by the attack/detection experiments:

  * generator rows with Pg == 0 in the source are set out of service,
    leaving 19 online units;
  * quadratic costs c2*P^2 + c1*P + c0 are replaced by linear costs whose
    slope is the average incremental cost over [0, Pmax]: c1 + c2*Pmax;
  * rateA for every branch is the smallest rating tier that is at least
    1.5x the branch's |flow| under the unconstrained merit-order dispatch,
    capped at 700 MW;
  * branches 111 (24-72) and 118 (76-77) get 35 MW and 70 MW, below their
    unconstrained flows, so both corridors are congested in the base case.

Only numpy is required. Usage: derive_case118.py data/case118.m data/case118_fdi.m
"""

import re
import sys

import numpy as np

TIERS = [100, 150, 200, 250, 300, 400, 500, 600, 700]
HEADROOM = 1.5
CONGESTED = {111: 35.0, 118: 70.0}


def read_block(text, name):
    m = re.search(r"mpc\.%s\s*=\s*\[(.*?)\];" % name, text, re.S)
    rows = []
    for line in m.group(1).splitlines():
        line = line.split("%")[0].strip().rstrip(";")
        if line:
            rows.append([float(v) for v in line.split()])
    return np.array(rows)


def merit_order(pmax, cost, load):
    out = np.zeros(len(pmax))
    rest = load
    for g in np.argsort(cost, kind="stable"):
        out[g] = min(pmax[g], rest)
        rest -= out[g]
    return out


def dc_flows(bus, branch, inj, ref):
    ids = {int(b): i for i, b in enumerate(bus[:, 0])}
    f = np.array([ids[int(v)] for v in branch[:, 0]])
    t = np.array([ids[int(v)] for v in branch[:, 1]])
    x = branch[:, 3]
    n = len(bus)
    B = np.zeros((n, n))
    for k in range(len(branch)):
        b = 1.0 / x[k]
        B[f[k], f[k]] += b
        B[t[k], t[k]] += b
        B[f[k], t[k]] -= b
        B[t[k], f[k]] -= b
    keep = [i for i in range(n) if i != ref]
    theta = np.zeros(n)
    theta[keep] = np.linalg.solve(B[np.ix_(keep, keep)], inj[keep])
    return (theta[f] - theta[t]) / x


def fmt(v):
    return str(int(v)) if float(v).is_integer() else "%.6g" % v


def write_block(name, arr, header):
    s = "%%%% %s data\n%%\t%s\nmpc.%s = [\n" % (name, "\t".join(header), name)
    for r in arr:
        s += "\t" + "\t".join(fmt(v) for v in r) + ";\n"
    return s + "];\n\n"


def main(src, dst):
    text = open(src).read()
    bus = read_block(text, "bus")
    gen = read_block(text, "gen")
    branch = read_block(text, "branch")
    gencost = read_block(text, "gencost")

    online = gen[:, 1] > 0
    gen[~online, 7] = 0

    ncost = gencost[:, 3].astype(int)
    assert (ncost == 3).all()
    slope = gencost[:, 5] + gencost[:, 4] * gen[:, 8]
    lin = np.column_stack([np.full(len(gen), 2.0), gencost[:, 1:3],
                           np.full(len(gen), 2.0), slope, np.zeros(len(gen))])

    ids = {int(b): i for i, b in enumerate(bus[:, 0])}
    ref = int(np.where(bus[:, 1] == 3)[0][0])
    load = bus[:, 2]
    pg = merit_order(np.where(online, gen[:, 8], 0.0), slope, load.sum())
    inj = -load.copy()
    for g in range(len(gen)):
        inj[ids[int(gen[g, 0])]] += pg[g]
    flows = dc_flows(bus, branch, inj / 100.0, ref) * 100.0

    rate = []
    for v in flows:
        need = HEADROOM * abs(v)
        rate.append(next((t for t in TIERS if t >= need), TIERS[-1]))
    for ordinal, mw in CONGESTED.items():
        rate[ordinal - 1] = mw
    branch[:, 5] = rate

    out = """function mpc = case118_fdi
%CASE118_FDI  IEEE 118-bus system prepared for DC attack/detection studies.
%   Derived from case118 by tools/derive_case118.py:
%   19 online units (synchronous condensers out of service), linear costs
%   (average incremental cost over [0, Pmax]), tiered thermal ratings with
%   1.5x headroom over the merit-order base flows, and congested corridors
%   on branch 111 (24-72, 35 MW) and branch 118 (76-77, 70 MW).

%% MATPOWER Case Format : Version 2
mpc.version = '2';

%%-----  Power Flow Data  -----%%
%% system MVA base
mpc.baseMVA = 100;

"""
    out += write_block("bus", bus, "bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin".split())
    out += write_block("gen", gen, "bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin".split())
    out += write_block("branch", branch,
                       "fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax".split())
    out += "%%-----  OPF Data  -----%%\n"
    out += write_block("gencost", lin, "2 startup shutdown n c1 c0".split())
    open(dst, "w").write(out)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
