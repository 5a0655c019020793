#!/usr/bin/env python3
# Copyright 2026 the gpcmtest authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Freezes reference optima for the shared-orientation M-step problems.

For random scatter instances this solves, to high precision and with an
optimizer wholly unrelated to the library's active-set/rotation updates,

  minimize  sum_j [ tr(W_j Sigma_j^{-1}) + n_j log|Sigma_j| ]

over the EVE structure (Sigma_j = lambda Gamma Delta_j Gamma', |Delta_j| = 1,
shapes sorted non-increasing, lambda profiled out analytically) and the VVE
structure (Sigma_j = Gamma diag(xi_j) Gamma', xi_j sorted non-increasing).
The rotation is parameterized as Gamma = expm(skew(w)) Gamma0 and the exact
gradient uses the Frechet derivative of expm.  SLSQP handles the ordering and
determinant constraints from several restarts; the winner is then polished
with BFGS on the manifold of active ties.  k=1 instances, whose optimum is
available in closed form, certify the pipeline's precision before anything
is frozen.

Output: tests/data/mstep_oracle.json (instances + frozen optima).
Run from the repository root:  python3 tools/dev/make_mstep_oracle.py
"""

import json
import sys

import numpy as np
from scipy.linalg import expm, expm_frechet, qr
from scipy.optimize import minimize

SEED = 20260814
P_SMALL, K_SMALL, N_SMALL = 3, 2, 100
EXTRA = [(4, 3), (4, 3), (4, 3)]
CLOSED_FORM_CHECKS = 5  # k=1 instances with an exact answer


def skew(w):
    m = int(round((1 + np.sqrt(1 + 8 * len(w))) / 2))
    s = np.zeros((m, m))
    idx = 0
    for i in range(m):
        for j in range(i + 1, m):
            s[i, j] = w[idx]
            s[j, i] = -w[idx]
            idx += 1
    return s


def skew_basis(p):
    basis = []
    for i in range(p):
        for j in range(i + 1, p):
            e = np.zeros((p, p))
            e[i, j] = 1.0
            e[j, i] = -1.0
            basis.append(e)
    return basis


def random_rotation(rng, p):
    a = rng.standard_normal((p, p))
    q, r = qr(a)
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_instance(rng, p, k, stress):
    n = rng.integers(20, 201, size=k)
    W = []
    base_rot = random_rotation(rng, p)
    for j in range(k):
        ev = np.exp(rng.uniform(np.log(0.05), np.log(20.0), size=p))
        ev = np.sort(ev)[::-1]
        if stress == "ties" and p >= 2:
            ev[1] = ev[0] * rng.uniform(0.98, 1.0)
        if stress == "aligned":
            rot = base_rot @ expm(skew(rng.standard_normal(p * (p - 1) // 2) * 0.05))
        else:
            rot = random_rotation(rng, p)
        W.append((rot * ev) @ rot.T * n[j])
    return [int(x) for x in n], W


class Problem:
    """Shared-orientation objective in (w, zeta) coordinates.

    VVE:  F = sum_j sum_l [ b_jl(Gamma) e^{-zeta_jl} + n_j zeta_jl ]
    EVE:  G = sum_j sum_l   b_jl(Gamma) e^{-zeta_jl},  sum_l zeta_jl = 0,
          F = N p (1 + log(G / (N p))) after profiling the common volume.
    Both: zeta_j non-increasing, Gamma = expm(skew(w)) Gamma0.
    """

    def __init__(self, n, W, model, base):
        self.n = np.asarray(n, dtype=float)
        self.W = [np.asarray(w) for w in W]
        self.model = model
        self.base = base
        self.p = self.W[0].shape[0]
        self.k = len(self.W)
        self.nw = self.p * (self.p - 1) // 2
        self.basis = skew_basis(self.p)
        self.N = float(self.n.sum())
        self.dim = self.nw + self.k * self.p

    def split(self, x):
        return x[: self.nw], x[self.nw :].reshape(self.k, self.p)

    def gamma(self, w):
        return expm(skew(w)) @ self.base

    def quad_forms(self, G):
        return np.stack([np.einsum("la,ab,bl->l", G.T, Wj, G) for Wj in self.W])

    def value(self, x):
        w, z = self.split(x)
        b = self.quad_forms(self.gamma(w))
        trace_sum = float(np.sum(b * np.exp(-z)))
        if self.model == "EVE":
            return self.N * self.p * (1.0 + np.log(trace_sum / (self.N * self.p)))
        return trace_sum + float(np.sum(self.n[:, None] * z))

    def grad(self, x):
        w, z = self.split(x)
        G = self.gamma(w)
        b = self.quad_forms(G)
        E = np.exp(-z)
        trace_sum = float(np.sum(b * E))
        if self.model == "EVE":
            scale = self.N * self.p / trace_sum
            db = scale * E
            dz = -scale * b * E
        else:
            db = E
            dz = -b * E + self.n[:, None]
        dF_dG = np.zeros_like(G)
        for j in range(self.k):
            dF_dG += 2.0 * self.W[j] @ G * db[j][None, :]
        S = skew(w)
        gw = np.empty(self.nw)
        for i, Ei in enumerate(self.basis):
            dG = expm_frechet(S, Ei, compute_expm=False) @ self.base
            gw[i] = float(np.sum(dF_dG * dG))
        return np.concatenate([gw, dz.ravel()])

    def constraints(self):
        p, k, nw = self.p, self.k, self.nw
        n_ord = k * (p - 1)
        jac_ord = np.zeros((n_ord, self.dim))
        row = 0
        for j in range(k):
            for l in range(p - 1):
                jac_ord[row, nw + j * p + l] = 1.0
                jac_ord[row, nw + j * p + l + 1] = -1.0
                row += 1

        def ord_fun(x):
            z = x[nw:].reshape(k, p)
            return (z[:, :-1] - z[:, 1:]).ravel()

        cons = [{"type": "ineq", "fun": ord_fun, "jac": lambda x: jac_ord}]
        if self.model == "EVE":
            jac_eq = np.zeros((k, self.dim))
            for j in range(k):
                jac_eq[j, nw + j * p : nw + (j + 1) * p] = 1.0
            cons.append(
                {
                    "type": "eq",
                    "fun": lambda x: x[nw:].reshape(k, p).sum(axis=1),
                    "jac": lambda x: jac_eq,
                }
            )
        return cons

    def feasible(self, x, tol=1e-9):
        _, z = self.split(x)
        if np.any(np.diff(z, axis=1) > tol):
            return False
        if self.model == "EVE" and np.any(np.abs(z.sum(axis=1)) > 1e-8):
            return False
        return True

    def initial_zeta(self, w):
        b = self.quad_forms(self.gamma(w))
        z = np.log(np.maximum(b, 1e-300) / self.n[:, None])
        z = -np.sort(-z, axis=1)
        if self.model == "EVE":
            z -= z.mean(axis=1, keepdims=True)
        return z


def polish(prob, x, f_best):
    """BFGS on the manifold of tied coordinates (plus sum-zero for EVE)."""
    nw, p, k = prob.nw, prob.p, prob.k
    _, z = prob.split(x)
    blocks = []
    for j in range(k):
        bl, cur = [], [0]
        for l in range(1, p):
            if z[j, l - 1] - z[j, l] < 1e-6:
                cur.append(l)
            else:
                bl.append(cur)
                cur = [l]
        bl.append(cur)
        blocks.append(bl)
    sizes = [[len(b) for b in bl] for bl in blocks]

    def expand(v):
        z_full = np.zeros((k, p))
        idx = nw
        for j in range(k):
            nb = len(blocks[j])
            nfree = nb - 1 if prob.model == "EVE" else nb
            vals = list(v[idx : idx + nfree])
            idx += nfree
            if prob.model == "EVE":
                rest = -sum(s * val for s, val in zip(sizes[j][:-1], vals))
                vals.append(rest / sizes[j][-1])
            for b, val in zip(blocks[j], vals):
                for l in b:
                    z_full[j, l] = val
        return np.concatenate([v[:nw], z_full.ravel()])

    def reduce_grad(g_full):
        g = list(g_full[:nw])
        gz = g_full[nw:].reshape(k, p)
        for j in range(k):
            nb = len(blocks[j])
            nfree = nb - 1 if prob.model == "EVE" else nb
            for t in range(nfree):
                gv = sum(gz[j, l] for l in blocks[j][t])
                if prob.model == "EVE":
                    gv -= (sizes[j][t] / sizes[j][-1]) * sum(gz[j, l] for l in blocks[j][-1])
                g.append(gv)
        return np.asarray(g)

    v0 = list(x[:nw])
    for j in range(k):
        nb = len(blocks[j])
        nfree = nb - 1 if prob.model == "EVE" else nb
        for t in range(nfree):
            v0.append(z[j, blocks[j][t][0]])
    v0 = np.asarray(v0)

    try:
        res = minimize(
            lambda v: prob.value(expand(v)),
            v0,
            jac=lambda v: reduce_grad(prob.grad(expand(v))),
            method="BFGS",
            options={"gtol": 1e-11, "maxiter": 2000},
        )
    except Exception:
        return f_best, x
    x_new = expand(res.x)
    if prob.feasible(x_new) and res.fun < f_best:
        return float(res.fun), x_new
    return f_best, x


def solve(n, W, model, rng):
    p = W[0].shape[0]
    nw = p * (p - 1) // 2

    base_candidates = []
    pooled = np.sum(W, axis=0)
    ev, vec = np.linalg.eigh(pooled)
    base_candidates.append(vec[:, np.argsort(ev)[::-1]])
    ev0, vec0 = np.linalg.eigh(W[0])
    base_candidates.append(vec0[:, np.argsort(ev0)[::-1]])

    best_f, best_x, best_prob = np.inf, None, None
    for base in base_candidates:
        if np.linalg.det(base) < 0:
            base = base.copy()
            base[:, -1] = -base[:, -1]
        prob = Problem(n, W, model, base)
        starts = [np.zeros(nw)]
        starts += [rng.standard_normal(nw) * s for s in (0.2, 0.5, 1.0, 1.5) for _ in range(2)]
        for w0 in starts:
            x0 = np.concatenate([w0, prob.initial_zeta(w0).ravel()])
            try:
                res = minimize(
                    prob.value,
                    x0,
                    jac=prob.grad,
                    method="SLSQP",
                    constraints=prob.constraints(),
                    options={"maxiter": 800, "ftol": 1e-14},
                )
            except Exception:
                continue
            if not prob.feasible(res.x, tol=1e-7):
                continue
            f, xx = polish(prob, res.x, float(res.fun))
            if f < best_f:
                best_f, best_x, best_prob = f, xx, prob
    if best_x is None:
        raise RuntimeError("no feasible solve")
    best_f, best_x = polish(best_prob, best_x, best_f)
    return float(best_f)


def closed_form_single(n, W):
    p = W.shape[0]
    _, ld = np.linalg.slogdet(W / n)
    return n * p + n * ld


def main():
    rng = np.random.default_rng(SEED)
    out = {"seed": SEED, "instances": []}

    worst = 0.0
    for _ in range(CLOSED_FORM_CHECKS):
        n, W = random_instance(rng, 3, 1, stress=None)
        exact = closed_form_single(n[0], W[0])
        for model in ("EVE", "VVE"):
            got = solve(n, W, model, rng)
            worst = max(worst, abs(got - exact))
    print(f"closed-form certification: worst |F - exact| = {worst:.3e}")
    if worst > 1e-8:
        print("pipeline not precise enough; aborting", file=sys.stderr)
        return 1

    specs = [(P_SMALL, K_SMALL)] * N_SMALL + EXTRA
    for i, (p, k) in enumerate(specs):
        stress = None
        if i % 5 == 3:
            stress = "ties"
        elif i % 5 == 4:
            stress = "aligned"
        n, W = random_instance(rng, p, k, stress)
        inst = {
            "p": p,
            "k": k,
            "n": n,
            "W": [w.tolist() for w in W],
            "F_eve": solve(n, W, "EVE", rng),
            "F_vve": solve(n, W, "VVE", rng),
        }
        out["instances"].append(inst)
        if (i + 1) % 10 == 0:
            print(f"{i + 1}/{len(specs)} instances done")

    with open("tests/data/mstep_oracle.json", "w") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")
    print(f"wrote tests/data/mstep_oracle.json with {len(out['instances'])} instances")
    return 0


if __name__ == "__main__":
    sys.exit(main())
