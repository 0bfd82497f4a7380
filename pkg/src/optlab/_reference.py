"""Plain-loop reference implementations of every update rule.

This module is the independent side of the dual-route checks: everything is
written with Python floats, lists, and explicit loops -- no numpy, no BLAS --
including its own Gram-Schmidt QR and Jacobi eigensolver. The production code
must match these trajectories to 1e-12 per coordinate; keeping the two code
paths disjoint is the point, so nothing here may import the array kernels.

Vectors are lists of floats; matrices are lists of rows.
"""

from __future__ import annotations

import math

# ---------------------------------------------------------------------------
# vector / matrix helpers


def vec_zeros(n):
    return [0.0] * n


def mat_zeros(rows, cols):
    return [[0.0] * cols for _ in range(rows)]


def mat_eye(n):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def mat_t(a):
    return [list(col) for col in zip(*a)]


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    out = mat_zeros(rows, cols)
    for i in range(rows):
        for k in range(inner):
            aik = a[i][k]
            if aik == 0.0:
                continue
            brow = b[k]
            orow = out[i]
            for j in range(cols):
                orow[j] += aik * brow[j]
    return out


def mat_frob(a):
    return math.sqrt(sum(x * x for row in a for x in row))


def sign(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def qr_orthonormal(a):
    """Thin Q with positive R diagonal, via twice-through modified Gram-Schmidt."""
    rows, cols = len(a), len(a[0])
    q_cols = []
    for j in range(cols):
        v = [a[i][j] for i in range(rows)]
        for _ in range(2):  # re-orthogonalize: twice is enough
            for qcol in q_cols:
                dot = sum(qcol[i] * v[i] for i in range(rows))
                for i in range(rows):
                    v[i] -= dot * qcol[i]
        norm = math.sqrt(sum(x * x for x in v))
        q_cols.append([x / norm for x in v])
    return [[q_cols[j][i] for j in range(cols)] for i in range(rows)]


def sym_eigenbasis(a):
    """Jacobi eigenvectors, descending eigenvalues, largest component positive."""
    n = len(a)
    work = [row[:] for row in a]
    vecs = mat_eye(n)
    for _ in range(200):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(work[p][q]))
        scale = max(max(abs(work[i][i]) for i in range(n)), 1e-300)
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p][q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = (work[q][q] - work[p][p]) / (2.0 * apq)
                t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = work[k][p], work[k][q]
                    work[k][p] = c * akp - s * akq
                    work[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = work[p][k], work[q][k]
                    work[p][k] = c * apk - s * aqk
                    work[q][k] = s * apk + c * aqk
                for k in range(n):
                    vkp, vkq = vecs[k][p], vecs[k][q]
                    vecs[k][p] = c * vkp - s * vkq
                    vecs[k][q] = s * vkp + c * vkq
    eigvals = [work[i][i] for i in range(n)]
    order = sorted(range(n), key=lambda i: (-eigvals[i], i))
    out = [[vecs[i][j] for j in order] for i in range(n)]
    for j in range(n):
        best = 0
        for i in range(1, n):
            if abs(out[i][j]) > abs(out[best][j]):
                best = i
        if out[best][j] < 0.0:
            for i in range(n):
                out[i][j] = -out[i][j]
    return out


def newton_schulz(g, iters, coeffs):
    a, b, c = coeffs
    norm = mat_frob(g)
    x = [[v / norm for v in row] for row in g]
    transposed = len(x) > len(x[0])
    if transposed:
        x = mat_t(x)
    for _ in range(iters):
        s = mat_mul(x, mat_t(x))
        y = mat_mul(s, x)
        sy = mat_mul(s, y)
        x = [
            [a * x[i][j] + b * y[i][j] + c * sy[i][j] for j in range(len(x[0]))]
            for i in range(len(x))
        ]
    return mat_t(x) if transposed else x


# ---------------------------------------------------------------------------
# elementwise rules (vectors)


class RefAdamW:
    def __init__(self, lam=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lam, self.b1, self.b2, self.eps = lam, beta1, beta2, eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, x, g, gamma):
        n = len(x)
        if self.m is None:
            self.m, self.v = vec_zeros(n), vec_zeros(n)
        self.t += 1
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        out = list(x)
        for i in range(n):
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * g[i]
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * g[i] * g[i]
            mhat = self.m[i] / bc1
            vhat = self.v[i] / bc2
            out[i] = x[i] - gamma * (mhat / (math.sqrt(vhat) + self.eps) + self.lam * x[i])
        return out


class RefAdopt:
    def __init__(self, lam=0.0, beta1=0.9, beta2=0.999, eps=1e-6):
        self.lam, self.b1, self.b2, self.eps = lam, beta1, beta2, eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, x, g, gamma):
        n = len(x)
        if self.v is None:  # first gradient only seeds v0
            self.m = vec_zeros(n)
            self.v = [gi * gi for gi in g]
            return list(x)
        self.t += 1
        c = self.t**0.25
        out = list(x)
        for i in range(n):
            ratio = g[i] / max(math.sqrt(self.v[i]), self.eps)
            clamped = min(max(ratio, -c), c)
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * clamped
            out[i] = x[i] - gamma * (self.m[i] + self.lam * x[i])
        for i in range(n):
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * g[i] * g[i]
        return out


class RefAdemamix:
    def __init__(self, lam=0.0, beta1=0.9, beta2=0.999, beta3=0.9999, alpha=8.0,
                 beta_start=None, t_alpha=1000, t_beta3=1000, eps=1e-8):
        self.lam, self.b1, self.b2 = lam, beta1, beta2
        self.b3, self.alpha = beta3, alpha
        self.beta_start = beta1 if beta_start is None else beta_start
        self.t_alpha, self.t_beta3 = t_alpha, t_beta3
        self.eps = eps
        self.m = None
        self.mslow = None
        self.v = None
        self.t = 0

    def _alpha_at(self, t):
        return min(t * self.alpha / self.t_alpha, self.alpha)

    def _beta3_at(self, t):
        if t >= self.t_beta3:
            return self.b3
        frac = t / self.t_beta3
        ls, le = math.log(self.beta_start), math.log(self.b3)
        return min(math.exp(ls * le / ((1.0 - frac) * le + frac * ls)), self.b3)

    def step(self, x, g, gamma):
        n = len(x)
        if self.m is None:
            self.m, self.mslow, self.v = vec_zeros(n), vec_zeros(n), vec_zeros(n)
        self.t += 1
        a_t = self._alpha_at(self.t)
        b3_t = self._beta3_at(self.t)
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        out = list(x)
        for i in range(n):
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * g[i]
            self.mslow[i] = b3_t * self.mslow[i] + (1.0 - b3_t) * g[i]
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * g[i] * g[i]
            num = self.m[i] / bc1 + a_t * self.mslow[i]
            den = math.sqrt(self.v[i] / bc2) + self.eps
            out[i] = x[i] - gamma * (num / den + self.lam * x[i])
        return out


class RefLion:
    def __init__(self, lam=0.0, beta1=0.9, beta2=0.99):
        self.lam, self.b1, self.b2 = lam, beta1, beta2
        self.m = None

    def step(self, x, g, gamma):
        n = len(x)
        if self.m is None:
            self.m = vec_zeros(n)
        out = list(x)
        for i in range(n):
            direction = sign(self.b1 * self.m[i] + (1.0 - self.b1) * g[i])
            out[i] = x[i] - gamma * (direction + self.lam * x[i])
        for i in range(n):
            self.m[i] = self.b2 * self.m[i] + (1.0 - self.b2) * g[i]
        return out


class RefSignum:
    def __init__(self, lam=0.0, beta=0.95, nesterov=True, dampening=0.0, coupled_wd=False):
        self.lam, self.beta = lam, beta
        self.nesterov, self.dampening, self.coupled = nesterov, dampening, coupled_wd
        self.m = None

    def step(self, x, g, gamma):
        n = len(x)
        if self.m is None:
            self.m = vec_zeros(n)
        out = list(x)
        for i in range(n):
            gi = g[i] + self.lam * x[i] if self.coupled else g[i]
            self.m[i] = self.beta * self.m[i] + (1.0 - self.dampening) * gi
            d = gi + self.beta * self.m[i] if self.nesterov else self.m[i]
            shrink = 0.0 if self.coupled else self.lam
            out[i] = x[i] - gamma * (sign(d) + shrink * x[i])
        return out


class RefSophia:
    def __init__(self, lam=0.0, beta1=0.9, beta2=0.999, rho=0.04, estimator_freq=10, eps=1e-15):
        self.lam, self.b1, self.b2 = lam, beta1, beta2
        self.rho, self.freq, self.eps = rho, estimator_freq, eps
        self.m = None
        self.h = None
        self.t = 0

    def step(self, x, g, gamma, hess_g=None, batch_size=None):
        n = len(x)
        if self.m is None:
            self.m, self.h = vec_zeros(n), vec_zeros(n)
        self.t += 1
        for i in range(n):
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * g[i]
        if self.t % self.freq == 1 % self.freq:
            for i in range(n):
                hb = batch_size * hess_g[i] * hess_g[i]
                self.h[i] = self.b2 * self.h[i] + (1.0 - self.b2) * hb
        out = list(x)
        for i in range(n):
            ratio = min(abs(self.m[i]) / (self.rho * self.h[i] + self.eps), 1.0)
            out[i] = x[i] - gamma * (sign(self.m[i]) * ratio + self.lam * x[i])
        return out


class RefScheduleFree:
    def __init__(self, x0, lam=0.0, beta1=0.9, beta2=0.9999, warmup=0, eps=1e-8):
        self.lam, self.b1, self.b2, self.eps = lam, beta1, beta2, eps
        self.warmup = warmup
        self.z = list(x0)
        self.x = list(x0)
        self.v = vec_zeros(len(x0))
        self.lr_sq_sum = 0.0
        self.t = 0

    def step(self, g, gamma):
        n = len(self.x)
        self.t += 1
        warm = min(1.0, self.t / self.warmup) if self.warmup > 0 else 1.0
        gamma_t = gamma * math.sqrt(1.0 - self.b2**self.t) * warm
        self.lr_sq_sum += gamma_t * gamma_t
        c = gamma_t * gamma_t / self.lr_sq_sum if self.lr_sq_sum > 0.0 else 1.0
        for i in range(n):
            y = (1.0 - self.b1) * self.z[i] + self.b1 * self.x[i]
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * g[i] * g[i]
            self.z[i] = self.z[i] - gamma_t * (g[i] / (math.sqrt(self.v[i]) + self.eps) + self.lam * y)
            self.x[i] = (1.0 - c) * self.x[i] + c * self.z[i]
        return list(self.x)


class RefProdigy:
    def __init__(self, x0, lam=0.0, beta1=0.9, beta2=0.999, bias_correction=True, d0=1e-6, eps=1e-8):
        self.lam, self.b1, self.b2 = lam, beta1, beta2
        self.bias = bias_correction
        self.eps = eps
        self.d = d0
        self.r = 0.0
        self.x0 = list(x0)
        self.x = list(x0)
        n = len(x0)
        self.s = vec_zeros(n)
        self.m = vec_zeros(n)
        self.v = vec_zeros(n)
        self.t = 0

    def step(self, g, gamma):
        n = len(self.x)
        self.t += 1
        d = self.d
        if self.bias:
            gamma_t = gamma * math.sqrt(1.0 - self.b2**self.t) / (1.0 - self.b1**self.t)
        else:
            gamma_t = gamma
        sqb2 = math.sqrt(self.b2)
        dot = sum(g[i] * (self.x0[i] - self.x[i]) for i in range(n))
        for i in range(n):
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * d * g[i]
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * d * d * g[i] * g[i]
        self.r = sqb2 * self.r + (1.0 - sqb2) * gamma_t * d * d * dot
        for i in range(n):
            self.s[i] = sqb2 * self.s[i] + (1.0 - sqb2) * gamma_t * d * d * g[i]
        s_norm = sum(abs(v) for v in self.s)
        d_next = max(d, self.r / s_norm) if s_norm > 0.0 else d
        for i in range(n):
            num = self.m[i] / (math.sqrt(self.v[i]) + d * self.eps)
            self.x[i] = self.x[i] - gamma_t * d * (num + self.lam * self.x[i])
        self.d = d_next
        return list(self.x)


# ---------------------------------------------------------------------------
# matrix rules


class RefMuonMatrix:
    def __init__(self, beta=0.95, ns_iters=5, ns_coeffs=(3.4445, -4.7750, 2.0315)):
        self.beta, self.ns_iters, self.coeffs = beta, ns_iters, ns_coeffs
        self.m = None

    def step(self, x, g, gamma):
        rows, cols = len(x), len(x[0])
        if self.m is None:
            self.m = mat_zeros(rows, cols)
        for i in range(rows):
            for j in range(cols):
                self.m[i][j] = self.beta * self.m[i][j] + g[i][j]
        d = [[self.beta * self.m[i][j] + g[i][j] for j in range(cols)] for i in range(rows)]
        ortho = newton_schulz(d, self.ns_iters, self.coeffs)
        return [[x[i][j] - gamma * ortho[i][j] for j in range(cols)] for i in range(rows)]


class RefDMuonMatrix:
    def __init__(self, lam=0.0, beta=0.95, rms_factor=0.2, ns_iters=5, ns_coeffs=(3.4445, -4.7750, 2.0315)):
        self.lam, self.beta = lam, beta
        self.rms_factor = rms_factor
        self.ns_iters, self.coeffs = ns_iters, ns_coeffs
        self.m = None

    def step(self, x, g, gamma):
        rows, cols = len(x), len(x[0])
        if self.m is None:
            self.m = mat_zeros(rows, cols)
        for i in range(rows):
            for j in range(cols):
                self.m[i][j] = self.beta * self.m[i][j] + g[i][j]
        d = [[self.beta * self.m[i][j] + g[i][j] for j in range(cols)] for i in range(rows)]
        ortho = newton_schulz(d, self.ns_iters, self.coeffs)
        scale = self.rms_factor * math.sqrt(max(rows, cols))
        return [
            [x[i][j] - gamma * (scale * ortho[i][j] + self.lam * x[i][j]) for j in range(cols)]
            for i in range(rows)
        ]


class RefSoapMatrix:
    def __init__(self, lam=0.0, beta1=0.9, beta2=0.999, precond_freq=10, bias_correction=True, eps=1e-8):
        self.lam, self.b1, self.b2 = lam, beta1, beta2
        self.freq, self.bias, self.eps = precond_freq, bias_correction, eps
        self.m = None
        self.v = None
        self.q_l = None
        self.q_r = None
        self.l_stat = None
        self.r_stat = None
        self.t = 0

    def step(self, x, g, gamma):
        rows, cols = len(x), len(x[0])
        if self.q_l is None:  # first gradient only initializes the bases
            left = mat_mul(g, mat_t(g))
            right = mat_mul(mat_t(g), g)
            left = [[(left[i][j] + left[j][i]) / 2.0 for j in range(rows)] for i in range(rows)]
            right = [[(right[i][j] + right[j][i]) / 2.0 for j in range(cols)] for i in range(cols)]
            self.q_l = sym_eigenbasis(left)
            self.q_r = sym_eigenbasis(right)
            self.l_stat = mat_zeros(rows, rows)
            self.r_stat = mat_zeros(cols, cols)
            self.m = mat_zeros(rows, cols)
            self.v = mat_zeros(rows, cols)
            return [row[:] for row in x]
        self.t += 1
        g_rot = mat_mul(mat_t(self.q_l), mat_mul(g, self.q_r))
        for i in range(rows):
            for j in range(cols):
                self.m[i][j] = self.b1 * self.m[i][j] + (1.0 - self.b1) * g[i][j]
        m_rot = mat_mul(mat_t(self.q_l), mat_mul(self.m, self.q_r))
        for i in range(rows):
            for j in range(cols):
                self.v[i][j] = self.b2 * self.v[i][j] + (1.0 - self.b2) * g_rot[i][j] * g_rot[i][j]
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        ratio = mat_zeros(rows, cols)
        for i in range(rows):
            for j in range(cols):
                if self.bias:
                    ratio[i][j] = (m_rot[i][j] / bc1) / (math.sqrt(self.v[i][j] / bc2) + self.eps)
                else:
                    ratio[i][j] = m_rot[i][j] / (math.sqrt(self.v[i][j]) + self.eps)
        update = mat_mul(self.q_l, mat_mul(ratio, mat_t(self.q_r)))
        out = [
            [x[i][j] - gamma * (update[i][j] + self.lam * x[i][j]) for j in range(cols)]
            for i in range(rows)
        ]
        ggt = mat_mul(g, mat_t(g))
        gtg = mat_mul(mat_t(g), g)
        for i in range(rows):
            for j in range(rows):
                self.l_stat[i][j] = self.b2 * self.l_stat[i][j] + (1.0 - self.b2) * ggt[i][j]
        for i in range(cols):
            for j in range(cols):
                self.r_stat[i][j] = self.b2 * self.r_stat[i][j] + (1.0 - self.b2) * gtg[i][j]
        if self.t > 1 and self.t % self.freq == 1 % self.freq:
            self.q_l = qr_orthonormal(mat_mul(self.l_stat, self.q_l))
            self.q_r = qr_orthonormal(mat_mul(self.r_stat, self.q_r))
        return out


class RefMarsMatrix:
    def __init__(self, variant="adamw", lam=0.0, beta1=0.95, beta2=0.99, eta=0.025,
                 ns_iters=5, ns_coeffs=(3.4445, -4.7750, 2.0315), eps=1e-8):
        self.variant = variant
        self.lam, self.b1, self.b2, self.eta = lam, beta1, beta2, eta
        self.ns_iters, self.coeffs, self.eps = ns_iters, ns_coeffs, eps
        self.g_prev = None
        self.m = None
        self.v = None
        self.t = 0

    def step(self, x, g, gamma):
        rows, cols = len(x), len(x[0])
        if self.m is None:
            self.g_prev = mat_zeros(rows, cols)
            self.m = mat_zeros(rows, cols)
            self.v = mat_zeros(rows, cols)
        self.t += 1
        scale = self.eta * self.b1 / (1.0 - self.b1)
        c = [
            [g[i][j] + scale * (g[i][j] - self.g_prev[i][j]) for j in range(cols)]
            for i in range(rows)
        ]
        if self.variant in ("adamw", "lion"):
            c_norm = math.sqrt(sum(v * v for row in c for v in row))
            if c_norm > 1.0:
                c = [[v / c_norm for v in row] for row in c]
        for i in range(rows):
            for j in range(cols):
                self.m[i][j] = self.b1 * self.m[i][j] + (1.0 - self.b1) * c[i][j]
        if self.variant == "adamw":
            bc1 = 1.0 - self.b1**self.t
            bc2 = 1.0 - self.b2**self.t
            direction = mat_zeros(rows, cols)
            for i in range(rows):
                for j in range(cols):
                    self.v[i][j] = self.b2 * self.v[i][j] + (1.0 - self.b2) * c[i][j] * c[i][j]
                    direction[i][j] = (self.m[i][j] / bc1) / (math.sqrt(self.v[i][j] / bc2) + self.eps)
        elif self.variant == "lion":
            direction = [[sign(self.m[i][j]) for j in range(cols)] for i in range(rows)]
        else:
            direction = newton_schulz(self.m, self.ns_iters, self.coeffs)
        out = [
            [x[i][j] - gamma * (direction[i][j] + self.lam * x[i][j]) for j in range(cols)]
            for i in range(rows)
        ]
        for i in range(rows):
            for j in range(cols):
                self.g_prev[i][j] = g[i][j]
        return out
