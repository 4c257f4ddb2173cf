"""Offline design of the SBC analysis prototype (not imported at runtime).

Searches for a 10*M tap prototype q such that the cosine-modulated
analysis bank Phi[i, n] = q[n] * cos((i+0.5)(n - M/2) pi / M), hopped by
M samples, forms a near-tight frame: synthesis by the adjoint operator
then reconstructs interior samples almost exactly. The winning taps are
frozen into src/codecaug/codecs/_sbc_proto.py.

Usage: python3 tools/design_sbc_prototype.py
"""

import numpy as np
from scipy import optimize, signal


def modulation(M, half=False):
    n = np.arange(10 * M)
    i = np.arange(M)
    shift = 0.5 if half else 0.0
    return np.cos((i[:, None] + 0.5) * (n[None, :] + shift - M / 2) * np.pi / M)


def pr_terms(M):
    """Flattened (rows, cols, group boundaries, targets) for the residual."""
    L = 10 * M
    rows, cols, targets, starts = [], [], [], []
    pos = 0
    for l in range(-9, 10):
        for r in range(M):
            for rp in range(M):
                pair = [(j * M + r, (j + l) * M + rp)
                        for j in range(10) if 0 <= (j + l) * M + rp < L]
                if not pair:
                    continue
                starts.append(pos)
                for a, b in pair:
                    rows.append(a)
                    cols.append(b)
                pos += len(pair)
                targets.append(1.0 if (l == 0 and r == rp) else 0.0)
    return (np.array(rows), np.array(cols), np.array(starts),
            np.array(targets))


def run(M=8, half=False, sign_period=None, seed=0, mu=1e-4):
    L = 10 * M
    C = modulation(M, half)
    K = C.T @ C
    rows, cols, starts, targets = pr_terms(M)
    Kv = K[rows, cols]

    omega = np.linspace(1.1 * np.pi / M, np.pi, 160)
    n = np.arange(L)
    F = np.exp(-1j * omega[:, None] * n[None, :])

    def fun_grad(q):
        prod = q[rows] * q[cols] * Kv
        sums = np.add.reduceat(prod, starts)
        err = sums - targets
        H = F @ q
        f = err @ err + mu * np.mean(np.abs(H) ** 2)
        # d/dq of sum_t (sum_pairs q_a q_b K)^2
        w = np.repeat(2.0 * err, np.diff(np.append(starts, rows.size)))
        g = np.zeros(L)
        np.add.at(g, rows, w * q[cols] * Kv)
        np.add.at(g, cols, w * q[rows] * Kv)
        g += mu * 2.0 / omega.size * np.real(F.conj().T @ H)
        return f, g

    rng = np.random.default_rng(seed)
    q0 = signal.firwin(L, 1.0 / (2 * M), window=("kaiser", 8.0))
    q0 = q0 / np.sqrt(np.sum(q0**2) * M)
    if sign_period:
        q0 = q0 * np.power(-1.0, (n + sign_period // 2) // sign_period)
    q0 = q0 + 1e-4 * rng.standard_normal(L)

    res = optimize.minimize(fun_grad, q0, jac=True, method="L-BFGS-B",
                            options={"maxiter": 20000, "maxfun": 200000,
                                     "ftol": 1e-18, "gtol": 1e-14})
    q = res.x

    Phi = q[None, :] * C
    x = rng.standard_normal(4096)
    T = x.size // M + 9
    pad = np.concatenate([np.zeros(9 * M), x, np.zeros(T * M - x.size)])
    win = np.lib.stride_tricks.sliding_window_view(pad, L)[::M][:T]
    S = win @ Phi.T
    contrib = S @ Phi
    y2 = np.zeros((T + 9, M))
    for j in range(10):
        y2[j:j + T] += contrib[:, j * M:(j + 1) * M]
    y = y2.reshape(-1)[9 * M:9 * M + x.size]
    rel = np.linalg.norm(y - x) / np.linalg.norm(x)

    # frequency selectivity: stopband attenuation of the prototype
    H = np.abs(F @ q)
    return q, res.fun, rel, 20 * np.log10(H.max() / max(np.abs(q).sum(), 1e-12))


if __name__ == "__main__":
    best = None
    for half in (False, True):
        for sp in (None, 16, 8):
            for seed in (0, 1):
                q, fun, rel, stop = run(8, half, sp, seed)
                print(f"half={half} sign={sp} seed={seed}: obj={fun:.3e} "
                      f"recon_rel={rel:.3e} ({20*np.log10(max(rel,1e-16)):.1f} dB) "
                      f"stop={stop:.1f} dB")
                if best is None or rel < best[1]:
                    best = (q, rel, half, sp, seed)
    q, rel, half, sp, seed = best
    print(f"\nbest: half={half} sign={sp} seed={seed} rel={rel:.3e}")
    print("taps:")
    for k in range(0, q.size, 4):
        print("    " + ", ".join(f"{v: .17e}" for v in q[k:k + 4]) + ",")
