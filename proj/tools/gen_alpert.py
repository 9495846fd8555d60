"""Solve the moment equations for the periodic log-singular end-correction
rules (Alpert 1999, SIAM J. Sci. Comput. 20(5), Table 6) in high precision.

A rule of order m+1 has m nodes chi_k, weights w_k and skips the a-1 nodes
nearest the singular point. It is exact, in the zeta-regularized sense, for
x^i and x^i log x with i = 0..m-1 on [0, inf).
"""
import sys
import mpmath as mp

mp.mp.dps = 60

SEEDS = {
    2: (1, [0.1591549430918953], [0.5]),
    4: (2, [0.2, 1.0, 1.9], [0.3, 1.0, 0.2]),  # refined by continuation below
    8: (5,
        [6.531815708567918e-03, 9.086744584657729e-02, 3.967966533375878e-01,
         1.027856640525646e+00, 1.945288592909266e+00, 2.980147933889640e+00,
         3.998861349951123e+00],
        [2.462194198995203e-02, 1.701315866854178e-01, 4.609256358650077e-01,
         7.947291148621895e-01, 1.008710414337933e+00, 1.036093649726216e+00,
         1.004787656533285e+00]),
    16: (10,
         [8.371529832014113e-04, 1.239382725542637e-02, 6.009290785739468e-02,
          1.805991249601928e-01, 4.142832599028031e-01, 7.964747731112430e-01,
          1.348993882467059e+00, 2.073471660264395e+00, 2.947904939031494e+00,
          3.928129252248612e+00, 4.957203086563112e+00, 5.986360113977494e+00,
          6.997957704791519e+00, 7.999888757524622e+00, 8.999998754306120e+00],
         [3.190919086626234e-03, 2.423621380426338e-02, 7.740135521653088e-02,
          1.704889420286369e-01, 3.029123478511309e-01, 4.652220834914617e-01,
          6.401489637096768e-01, 8.051212946181061e-01, 9.362411945698647e-01,
          1.014359775369075e+00, 1.035167721053657e+00, 1.020308624984610e+00,
          1.004798397441514e+00, 1.000395017352309e+00, 1.000007149422537e+00]),
}


def targets(m, a):
    t = []
    for i in range(m):
        t.append(mp.fsum(mp.mpf(j) ** i for j in range(1, a)) - mp.zeta(-i))
    for i in range(m):
        t.append(mp.fsum((mp.mpf(j) ** i) * mp.log(j) for j in range(1, a))
                 + mp.zeta(-i, derivative=1))
    return t


def solve(order):
    a, x0, w0 = SEEDS[order]
    m = len(x0)
    rhs = targets(m, a)

    def F(*v):
        xs, ws = v[:m], v[m:]
        out = []
        for i in range(m):
            out.append(mp.fsum(w * x ** i for x, w in zip(xs, ws)) - rhs[i])
        for i in range(m):
            out.append(mp.fsum(w * x ** i * mp.log(x) for x, w in zip(xs, ws)) - rhs[m + i])
        return out

    sol = mp.findroot(F, [mp.mpf(v) for v in x0 + w0], tol=mp.mpf(10) ** -50, maxsteps=200)
    sol = [sol[i] for i in range(2 * m)]
    return a, sol[:m], sol[m:]


if __name__ == "__main__":
    for order in map(int, sys.argv[1:] or ["2", "8", "16"]):
        a, xs, ws = solve(order)
        print(f"// order {order}: a = {a}, m = {len(xs)}")
        for x, w in zip(xs, ws):
            print(f"    {{{mp.nstr(x, 17, min_fixed=-1, max_fixed=-1)}, {mp.nstr(w, 17, min_fixed=-1, max_fixed=-1)}}},")
