"""Symbolic reference values for the frozen constants in the Rust test suite.

Everything here is differentiated symbolically from the scalar functions
A, F^2 = A^(2/m) and Fbar^2 = A^(4/m)/beta^2; none of the closed forms
implemented in the crate are used.

    python3 crates/core/tests/golden/golden.py
"""
import sympy as sp

x1, x2, y1, y2 = sp.symbols("x1 x2 y1 y2", real=True)
X = [x1, x2]
Y = [y1, y2]


def sprays(L):
    g = sp.Matrix(2, 2, lambda i, j: sp.diff(L, Y[i], Y[j]) / 2)
    ginv = g.inv()
    rhs = [sum(sp.diff(L, X[k], Y[l]) * Y[k] for k in range(2)) - sp.diff(L, X[l]) for l in range(2)]
    return [sum(ginv[i, l] * rhs[l] for l in range(2)) / 4 for i in range(2)]


def wedge(G, Gb, yv):
    D = [Gb[i] - G[i] for i in range(2)]
    num = abs(D[0] * yv[1] - D[1] * yv[0])
    ny = sp.sqrt(sum(v * v for v in yv))
    den = (sp.sqrt(sum(v * v for v in G)) + sp.sqrt(sum(v * v for v in Gb))) * ny
    return num / den


def dual_flat(L, yv):
    r = [sum(sp.diff(L, X[k], Y[l]) * Y[k] for k in range(2)) - 2 * sp.diff(L, X[l]) for l in range(2)]
    return r


def proj_flat(Fb):
    return [sum(sp.diff(Fb, X[k], Y[l]) * Y[k] for k in range(2)) - sp.diff(Fb, X[l]) for l in range(2)]


m = 3
A = (1 + x1) * (y1**3 + y2**3)
F2 = A ** sp.Rational(2, m)


def subs(e, xv, yv):
    return e.subs({x1: xv[0], x2: xv[1], y1: yv[0], y2: yv[1]})


def num(e, xv, yv):
    return sp.N(subs(e, xv, yv), 20)


G = sprays(F2)
print("fix_x base spray at x=(0,0), y=(1,1):", [num(g, (0, 0), (1, 1)) for g in G])

cases = {
    "B": (1, 0),
    "BX": (1 + x2, 0),
    "B11": (1, 1),
}
for name, b in cases.items():
    beta = b[0] * y1 + b[1] * y2
    L = A ** sp.Rational(4, m) / beta**2
    Fb = A ** sp.Rational(2, m) / beta
    Gb = sprays(L)
    for (xv, yv) in [((0, 0), (1, 1)), ((sp.Rational(3, 10), sp.Rational(-1, 5)), (sp.Rational(7, 10), sp.Rational(11, 10)))]:
        gbv = [subs(e, xv, yv) for e in Gb]
        gv = [subs(e, xv, yv) for e in G]
        w = wedge(gv, gbv, yv)
        Fb2v = subs(L, xv, yv)
        Fbv = subs(Fb, xv, yv)
        df = max(abs(sp.N(subs(e, xv, yv), 30)) for e in dual_flat(L, yv))
        pf = max(abs(sp.N(subs(e, xv, yv), 30)) for e in proj_flat(Fb))
        print(f"fix_x+{name} x={xv} y={yv}")
        print("   Gbar =", [sp.N(v, 20) for v in gbv])
        print("   wedge =", sp.N(w, 20))
        print("   dually_flat_raw =", sp.N(df, 20), " normalized =", sp.N(df / (1 + abs(Fb2v)), 20))
        print("   proj_flat_raw =", sp.N(pf, 20), " normalized =", sp.N(pf / (1 + abs(Fbv)), 20))
