"""Numba kernels for the prime-qudit stabilizer tableau and flagged circuits.

Conventions (fixed across the whole package):

* A Pauli word on L qudits of prime dimension p is stored as a row of 2L
  exponents, columns [0, L) holding the X exponents and [L, 2L) the Z
  exponents, plus an integer phase exponent.
* For odd p the word is omega^phi * D_(x|z) with the symmetric Weyl
  displacement D_(x|z) = tau^{x.z} X^x Z^z, tau = omega^{(p+1)/2}. Phases
  close in Z_p and gate conjugation is exactly linear:
  v -> M v, phi -> phi + gamma.v.
* For p = 2 the word is i^phi X^x Z^z with phi mod 4; reordering picks up
  the usual factor (-1)^{z1.x2}, which makes conjugation quadratic in v.
* The internal symplectic form is <u,v> = u_x.v_z - u_z.v_x mod p.

Alongside the g generator rows the tableau keeps g destabilizer rows: a dual
frame with <D_i, W_j> = delta_ij (phases of destabilizers are irrelevant and
not tracked). Group-membership queries for Z_j then read candidate
coefficients straight from the destabilizer X column, lam_i = x_{D_i}[j],
and one O(g L) fold both verifies membership and produces the exact phase.

The trajectory RNG is a counter-based splitmix64 stream: the state is a
uint64[2] array (key, counter) and every draw is a pure function of
(key, counter), so trajectories are reproducible and splittable by key.
"""

import numpy as np
from numba import njit

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_M1 = U64(0xBF58476D1CE4E5B9)
_M2 = U64(0x94D049BB133111EB)


# ---------------------------------------------------------------------------
# counter-based RNG (splitmix64 finalizer applied to key + counter*gamma)
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _M1
    z = (z ^ (z >> U64(27))) * _M2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def rng_next(st):
    st[1] = st[1] + U64(1)
    return _mix64(st[0] + st[1] * _GAMMA)


@njit(cache=True, inline="always")
def rng_below(st, n):
    # modulo bias is O(n / 2^64), far below anything observable here
    return np.int64(rng_next(st) % U64(n))


@njit(cache=True, inline="always")
def rng_unit(st):
    return np.float64(rng_next(st) >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def derive_key(master_seed, index):
    """Per-trajectory stream key from (master_seed, trajectory index)."""
    z = _mix64(U64(master_seed) + _GAMMA)
    return _mix64(z ^ (U64(index) * _M1 + _M2))


@njit(cache=True, inline="always")
def mod_inv(a, p):
    """Inverse of a mod prime p (a in [1, p))."""
    t = np.int64(0)
    newt = np.int64(1)
    r = np.int64(p)
    newr = np.int64(a)
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    if t < 0:
        t += p
    return t


# ---------------------------------------------------------------------------
# two-qudit Clifford sampling: uniform Sp(4, p) plus uniform Pauli translate
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _sp4(u, v, p):
    s = u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]
    return s % p


@njit(cache=True)
def sample_clifford2(p, st, M, gamma):
    """Fill M (4x4 int64) with a uniform element of Sp(4, F_p) and gamma
    with uniform image phase exponents.

    Basis/column order is (x_j, x_k, z_j, z_k): column i is the image of the
    i-th basis displacement (X_j, X_k, Z_j, Z_k). The symplectic basis is
    built pair by pair: uniform nonzero v1, uniform Z-partner w1 with
    <v1,w1> = 1, then the same inside the symplectic complement. Each step
    ranges over exactly the coset sizes whose product is |Sp(4,p)|, so the
    parameterization is bijective and the draw uniform.
    """
    v1 = np.empty(4, np.int64)
    w1 = np.empty(4, np.int64)
    c = np.empty(4, np.int64)
    b1 = np.empty(4, np.int64)
    b2 = np.empty(4, np.int64)
    w2 = np.empty(4, np.int64)

    # v1: uniform nonzero vector
    k = rng_below(st, p * p * p * p - 1) + 1
    for i in range(4):
        v1[i] = k % p
        k //= p

    # w1: uniform solution of <v1, w> = 1
    c[0] = (-v1[2]) % p
    c[1] = (-v1[3]) % p
    c[2] = v1[0]
    c[3] = v1[1]
    piv = 0
    for i in range(4):
        if c[i] != 0:
            piv = i
            break
    t = rng_below(st, p * p * p)
    acc = np.int64(0)
    for i in range(4):
        if i == piv:
            continue
        w1[i] = t % p
        t //= p
        acc += c[i] * w1[i]
    w1[piv] = (mod_inv(c[piv], p) * ((1 - acc) % p)) % p

    # basis of the symplectic complement of span(v1, w1): kernel of the
    # 2x4 system <v1,u> = 0, <w1,u> = 0
    A = np.empty((2, 4), np.int64)
    A[0, 0] = (-v1[2]) % p
    A[0, 1] = (-v1[3]) % p
    A[0, 2] = v1[0] % p
    A[0, 3] = v1[1] % p
    A[1, 0] = (-w1[2]) % p
    A[1, 1] = (-w1[3]) % p
    A[1, 2] = w1[0] % p
    A[1, 3] = w1[1] % p
    pivcol = np.empty(2, np.int64)
    rank = 0
    for col in range(4):
        sel = -1
        for r in range(rank, 2):
            if A[r, col] % p != 0:
                sel = r
                break
        if sel < 0:
            continue
        if sel != rank:
            for cc in range(4):
                tmp = A[rank, cc]
                A[rank, cc] = A[sel, cc]
                A[sel, cc] = tmp
        inv = mod_inv(A[rank, col] % p, p)
        for cc in range(4):
            A[rank, cc] = (A[rank, cc] * inv) % p
        for r in range(2):
            if r != rank and A[r, col] % p != 0:
                f = A[r, col] % p
                for cc in range(4):
                    A[r, cc] = (A[r, cc] - f * A[rank, cc]) % p
        pivcol[rank] = col
        rank += 1
        if rank == 2:
            break
    nb = 0
    for col in range(4):
        if col == pivcol[0] or col == pivcol[1]:
            continue
        dst = b1 if nb == 0 else b2
        for i in range(4):
            dst[i] = 0
        dst[col] = 1
        for r in range(rank):
            dst[pivcol[r]] = (-A[r, col]) % p
        nb += 1

    # v2: uniform nonzero combination of (b1, b2)
    k2 = rng_below(st, p * p - 1) + 1
    al = k2 % p
    be = k2 // p
    v2 = np.empty(4, np.int64)
    for i in range(4):
        v2[i] = (al * b1[i] + be * b2[i]) % p

    # w2: uniform solution of <v2, w> = 1 inside the complement
    d1 = _sp4(v2, b1, p)
    d2 = _sp4(v2, b2, p)
    r = rng_below(st, p)
    if d1 != 0:
        s = mod_inv(d1, p)
        for i in range(4):
            w2[i] = (s * b1[i] + r * v2[i]) % p
    else:
        s = mod_inv(d2, p)
        for i in range(4):
            w2[i] = (s * b2[i] + r * v2[i]) % p

    for i in range(4):
        M[i, 0] = v1[i]
        M[i, 1] = v2[i]
        M[i, 2] = w1[i]
        M[i, 3] = w2[i]

    if p == 2:
        for i in range(4):
            herm = (M[0, i] * M[2, i] + M[1, i] * M[3, i]) % 2
            gamma[i] = (herm + 2 * rng_below(st, 2)) % 4
    else:
        for i in range(4):
            gamma[i] = rng_below(st, p)


# ---------------------------------------------------------------------------
# tableau mutations
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _gate_luts(M, gamma, tv, tp):
    """p=2: tabulate the local map for all 16 input patterns.
    tv[idx] = output 4-bit pattern, tp[idx] = phase increment mod 4."""
    for idx in range(16):
        v0 = idx & 1
        v1 = (idx >> 1) & 1
        v2 = (idx >> 2) & 1
        v3 = (idx >> 3) & 1
        ph = gamma[0] * v0 + gamma[1] * v1 + gamma[2] * v2 + gamma[3] * v3
        # reordering corrections C[i,l] = mz_i . mx_l for i < l
        vv = (v0, v1, v2, v3)
        for i in range(4):
            if vv[i] == 0:
                continue
            for l in range(i + 1, 4):
                if vv[l] == 0:
                    continue
                ph += 2 * ((M[2, i] * M[0, l] + M[3, i] * M[1, l]) % 2)
        out = 0
        for r in range(4):
            b = (M[r, 0] * v0 + M[r, 1] * v1 + M[r, 2] * v2 + M[r, 3] * v3) % 2
            out |= b << r
        tv[idx] = out
        tp[idx] = ph % 4


@njit(cache=True)
def apply_gate2(exps, phases, g, L, p, M, gamma, j, k):
    """Conjugate generator rows (with phases) through a gate on (j, k)."""
    if p == 2:
        tv = np.empty(16, np.int64)
        tp = np.empty(16, np.int64)
        _gate_luts(M, gamma, tv, tp)
        for row in range(g):
            idx = (exps[row, j] | (exps[row, k] << 1)
                   | (exps[row, L + j] << 2) | (exps[row, L + k] << 3))
            out = tv[idx]
            phases[row] = (phases[row] + tp[idx]) & 3
            exps[row, j] = out & 1
            exps[row, k] = (out >> 1) & 1
            exps[row, L + j] = (out >> 2) & 1
            exps[row, L + k] = (out >> 3) & 1
    else:
        for row in range(g):
            v0 = np.int64(exps[row, j])
            v1 = np.int64(exps[row, k])
            v2 = np.int64(exps[row, L + j])
            v3 = np.int64(exps[row, L + k])
            ph = phases[row] + gamma[0] * v0 + gamma[1] * v1 + gamma[2] * v2 + gamma[3] * v3
            phases[row] = ph % p
            exps[row, j] = (M[0, 0] * v0 + M[0, 1] * v1 + M[0, 2] * v2 + M[0, 3] * v3) % p
            exps[row, k] = (M[1, 0] * v0 + M[1, 1] * v1 + M[1, 2] * v2 + M[1, 3] * v3) % p
            exps[row, L + j] = (M[2, 0] * v0 + M[2, 1] * v1 + M[2, 2] * v2 + M[2, 3] * v3) % p
            exps[row, L + k] = (M[3, 0] * v0 + M[3, 1] * v1 + M[3, 2] * v2 + M[3, 3] * v3) % p


@njit(cache=True)
def apply_gate2_vec(rows, g, L, p, M, j, k):
    """Symplectic action only (no phases): used for destabilizer rows."""
    if p == 2:
        tv = np.empty(16, np.int64)
        for idx in range(16):
            v0 = idx & 1
            v1 = (idx >> 1) & 1
            v2 = (idx >> 2) & 1
            v3 = (idx >> 3) & 1
            out = 0
            for r in range(4):
                b = (M[r, 0] * v0 + M[r, 1] * v1 + M[r, 2] * v2 + M[r, 3] * v3) % 2
                out |= b << r
            tv[idx] = out
        for row in range(g):
            idx = (rows[row, j] | (rows[row, k] << 1)
                   | (rows[row, L + j] << 2) | (rows[row, L + k] << 3))
            out = tv[idx]
            rows[row, j] = out & 1
            rows[row, k] = (out >> 1) & 1
            rows[row, L + j] = (out >> 2) & 1
            rows[row, L + k] = (out >> 3) & 1
    else:
        for row in range(g):
            v0 = np.int64(rows[row, j])
            v1 = np.int64(rows[row, k])
            v2 = np.int64(rows[row, L + j])
            v3 = np.int64(rows[row, L + k])
            rows[row, j] = (M[0, 0] * v0 + M[0, 1] * v1 + M[0, 2] * v2 + M[0, 3] * v3) % p
            rows[row, k] = (M[1, 0] * v0 + M[1, 1] * v1 + M[1, 2] * v2 + M[1, 3] * v3) % p
            rows[row, L + j] = (M[2, 0] * v0 + M[2, 1] * v1 + M[2, 2] * v2 + M[2, 3] * v3) % p
            rows[row, L + k] = (M[3, 0] * v0 + M[3, 1] * v1 + M[3, 2] * v2 + M[3, 3] * v3) % p


@njit(cache=True)
def _row_symp(exps, m, krow, L, p):
    s = np.int64(0)
    for c in range(L):
        s += np.int64(exps[m, c]) * np.int64(exps[krow, L + c]) \
            - np.int64(exps[m, L + c]) * np.int64(exps[krow, c])
    return s % p


@njit(cache=True)
def _row_zx(exps, m, krow, L):
    s = np.int64(0)
    for c in range(L):
        s += np.int64(exps[m, L + c]) * np.int64(exps[krow, c])
    return s


@njit(cache=True)
def _mult_row_into(exps, phases, m, krow, t, L, p):
    """Generator m <- generator m * (generator krow)^t, phases exact."""
    if p == 2:
        # t is 1 here; keep the row op in int8 so it vectorizes
        s = np.int64(0)
        for c in range(L):
            s += exps[m, L + c] & exps[krow, c]
        phases[m] = (phases[m] + phases[krow] + 2 * s) % 4
        for c in range(2 * L):
            exps[m, c] ^= exps[krow, c]
    else:
        inv2 = (p + 1) // 2
        s = _row_symp(exps, m, krow, L, p)
        ph = phases[m] + t * phases[krow] - inv2 * t * s
        phases[m] = ph % p
        for c in range(2 * L):
            exps[m, c] = (np.int64(exps[m, c]) + t * np.int64(exps[krow, c])) % p


@njit(cache=True)
def fold_z_candidate(exps, phases, g, L, p, lam, j):
    """Compute prod_i W_i^{lam_i}; return (matches Z_j as a vector, omega
    exponent b of the product). One O(sum_nonzero L) pass."""
    accv = np.zeros(2 * L, np.int64)
    accp = np.int64(0)
    inv2 = (p + 1) // 2
    for i in range(g):
        li = lam[i] % p
        if li == 0:
            continue
        if p == 2:
            zx = np.int64(0)
            for c in range(L):
                zx += accv[L + c] * np.int64(exps[i, c])
            accp = (accp + phases[i] + 2 * zx) % 4
        else:
            sy = np.int64(0)
            for c in range(L):
                sy += accv[c] * np.int64(exps[i, L + c]) \
                    - accv[L + c] * np.int64(exps[i, c])
            sy %= p
            accp = (accp + li * phases[i] - inv2 * li * sy) % p
        for c in range(2 * L):
            accv[c] = (accv[c] + li * np.int64(exps[i, c])) % p
    ok = True
    for c in range(2 * L):
        want = 1 if c == L + j else 0
        if accv[c] != want:
            ok = False
            break
    if p == 2:
        return ok, accp // 2  # member phases are i^{2b}
    return ok, accp


@njit(cache=True)
def z_code_site(exps, phases, destab, g, L, p, j):
    """Measurement class of Z_j without collapsing.

    Returns -1 when the outcome would be uniform over F_p (a generator
    anticommutes, or Z_j is independent of the group), else the omega
    exponent b of the group element omega^b Z_j (deterministic outcome -b).
    """
    for m in range(g):
        if exps[m, j] != 0:
            return np.int64(-1)
    lam = np.empty(g, np.int64)
    for i in range(g):
        lam[i] = np.int64(destab[i, j])
    ok, b = fold_z_candidate(exps, phases, g, L, p, lam, j)
    if ok:
        return b
    return np.int64(-1)


@njit(cache=True)
def measure_site(exps, phases, destab, g, L, p, j, st):
    """Projective Z measurement at site j. Returns (outcome, new_g)."""
    piv = -1
    for m in range(g):
        if exps[m, j] != 0:
            piv = m
            break
    if piv >= 0:
        # case (i): uniform outcome; clear anticommutation with the pivot,
        # re-point the dual frame, replace the pivot by omega^{-a} Z_j
        a = rng_below(st, p)
        ckinv = mod_inv(np.int64(exps[piv, j]) % p, p)
        if p == 2:
            for m in range(g):
                if m == piv:
                    continue
                if exps[m, j] != 0:
                    _mult_row_into(exps, phases, m, piv, 1, L, p)
                if destab[m, j] != 0:
                    for c in range(2 * L):
                        destab[m, c] ^= exps[piv, c]
            for c in range(2 * L):
                destab[piv, c] = exps[piv, c]
        else:
            for m in range(g):
                if m == piv:
                    continue
                cm = np.int64(exps[m, j])
                if cm != 0:
                    t = (p - (cm * ckinv) % p) % p
                    _mult_row_into(exps, phases, m, piv, t, L, p)
                dm = np.int64(destab[m, j])
                if dm != 0:
                    td = (p - (dm * ckinv) % p) % p
                    for c in range(2 * L):
                        destab[m, c] = (np.int64(destab[m, c])
                                        + td * np.int64(exps[piv, c])) % p
            for c in range(2 * L):
                destab[piv, c] = (ckinv * np.int64(exps[piv, c])) % p
        for c in range(2 * L):
            exps[piv, c] = 0
        exps[piv, L + j] = 1
        phases[piv] = (2 * a) % 4 if p == 2 else (p - a) % p
        return a, g
    lam = np.empty(g, np.int64)
    for i in range(g):
        lam[i] = np.int64(destab[i, j])
    ok, b = fold_z_candidate(exps, phases, g, L, p, lam, j)
    if ok:
        # case (ii): deterministic outcome, state untouched
        return (p - b) % p, g
    # case (iii): purification event; append omega^{-a} Z_j and extend the
    # dual frame with u/s where u = u0 - sum_i <u0,W_i> D_i, s = <u, Z_j>
    a = rng_below(st, p)
    u = np.zeros(2 * L, np.int64)
    s = np.int64(0)
    for trial in range(2 * L + 1):
        for c in range(2 * L):
            u[c] = 0
        if trial == 0:
            u[j] = 1
        elif trial <= L:
            u[trial - 1] = 1
        else:
            u[trial - 1] = 1  # index in [L, 2L): a Z basis vector
        # e_i = <u0, W_i>: X_m gives z-column m, Z_m gives -x-column m
        for i in range(g):
            if trial <= L:
                m0 = j if trial == 0 else trial - 1
                ei = np.int64(exps[i, L + m0]) % p
            else:
                m0 = trial - 1 - L
                ei = (p - np.int64(exps[i, m0])) % p
            if ei != 0:
                for c in range(2 * L):
                    u[c] = (u[c] - ei * np.int64(destab[i, c])) % p
        s = u[j] % p
        if s != 0:
            break
    sinv = mod_inv(s, p)
    # clear the old frame's overlap with Z_j first (reads x-column j)
    for i in range(g):
        di = np.int64(destab[i, j]) % p
        if di != 0:
            f = (di * sinv) % p
            for c in range(2 * L):
                destab[i, c] = (np.int64(destab[i, c]) - f * u[c]) % p
    for c in range(2 * L):
        destab[g, c] = (sinv * u[c]) % p
        exps[g, c] = 0
    exps[g, L + j] = 1
    phases[g] = (2 * a) % 4 if p == 2 else (p - a) % p
    return a, g + 1


@njit(cache=True)
def shift_to_zero(exps, phases, g, L, p, j, outcome):
    """Apply X_j^{-outcome} so the measured site lands in |0>."""
    if outcome == 0:
        return
    cc = (p - outcome) % p
    if p == 2:
        for m in range(g):
            phases[m] = (phases[m] + 2 * cc * np.int64(exps[m, L + j])) % 4
    else:
        for m in range(g):
            phases[m] = (phases[m] - cc * np.int64(exps[m, L + j])) % p


@njit(cache=True)
def reset_site_k(exps, phases, destab, g, L, p, j, st):
    outcome, g2 = measure_site(exps, phases, destab, g, L, p, j, st)
    shift_to_zero(exps, phases, g2, L, p, j, outcome)
    return outcome, g2


@njit(cache=True)
def det_codes(exps, phases, destab, g, L, p, out):
    """z_code_site for every site (occupation expectations in one pass)."""
    for j in range(L):
        out[j] = z_code_site(exps, phases, destab, g, L, p, j)


@njit(cache=True)
def rank_cols(exps, g, p, cols):
    """Rank over F_p of the generator matrix restricted to `cols`."""
    n = cols.shape[0]
    if g == 0 or n == 0:
        return 0
    A = np.empty((g, n), np.int64)
    for r in range(g):
        for i in range(n):
            A[r, i] = exps[r, cols[i]]
    rank = 0
    for col in range(n):
        sel = -1
        for r in range(rank, g):
            if A[r, col] != 0:
                sel = r
                break
        if sel < 0:
            continue
        if sel != rank:
            for c in range(n):
                tmp = A[rank, c]
                A[rank, c] = A[sel, c]
                A[sel, c] = tmp
        inv = mod_inv(A[rank, col], p)
        for r in range(rank + 1, g):
            if A[r, col] != 0:
                f = (A[r, col] * inv) % p
                for c in range(col, n):
                    A[r, c] = (A[r, c] - f * A[rank, c]) % p
        rank += 1
        if rank == g:
            break
    return rank


@njit(cache=True)
def suffix_rank_profile(exps, g, L, p, out):
    """out[s] = rank of the generator columns of sites s..L-1 (x and z),
    for every s, in one sweep. Used for nested-interval entropies."""
    for s in range(L + 1):
        out[s] = 0
    if g == 0:
        return
    basis = np.empty((g, g), np.int64)  # row bi: stored vector, lead coeff 1
    pos = np.full(g, -1, np.int64)      # lead index -> basis row
    nb = 0
    vec = np.empty(g, np.int64)
    for s in range(L - 1, -1, -1):
        for which in range(2):
            col = s if which == 0 else L + s
            for r in range(g):
                vec[r] = np.int64(exps[r, col]) % p
            # monotone sweep: basis vectors are zero before their lead, so
            # clearing positions in increasing order never reintroduces one
            for r in range(g):
                if vec[r] == 0 or pos[r] < 0:
                    continue
                f = vec[r]
                bi = pos[r]
                for rr in range(r, g):
                    vec[rr] = (vec[rr] - f * basis[bi, rr]) % p
            lead = -1
            for r in range(g):
                if vec[r] != 0:
                    lead = r
                    break
            if lead >= 0:
                inv = mod_inv(vec[lead], p)
                for r in range(g):
                    basis[nb, r] = (vec[r] * inv) % p
                pos[lead] = nb
                nb += 1
        out[s] = nb


# ---------------------------------------------------------------------------
# brickwork driver
# ---------------------------------------------------------------------------

@njit(cache=True)
def brick_layer(exps, phases, destab, g, L, p, flags, p_rate, parity,
                periodic, st, M, gamma, marks):
    """One circuit layer: flag-gated gates of the given parity, then
    independent per-site resets at rate p_rate. marks[j] is set to 1 where a
    reset fired. Returns the new generator count."""
    if parity == 0:
        npairs = L // 2
        for i in range(npairs):
            j = 2 * i
            k = j + 1
            if flags[j] == 1 or flags[k] == 1:
                sample_clifford2(p, st, M, gamma)
                apply_gate2(exps, phases, g, L, p, M, gamma, j, k)
                apply_gate2_vec(destab, g, L, p, M, j, k)
                flags[j] = 1
                flags[k] = 1
    else:
        npairs = L // 2 if periodic else (L - 1) // 2
        for i in range(npairs):
            j = 2 * i + 1
            k = (j + 1) % L
            if flags[j] == 1 or flags[k] == 1:
                sample_clifford2(p, st, M, gamma)
                apply_gate2(exps, phases, g, L, p, M, gamma, j, k)
                apply_gate2_vec(destab, g, L, p, M, j, k)
                flags[j] = 1
                flags[k] = 1
    for j in range(L):
        marks[j] = 0
        if rng_unit(st) < p_rate:
            marks[j] = 1
            if flags[j] == 1:
                # flag soundness: a flag-0 site is exactly |0>, so the
                # reset measurement is a no-op on the state
                _, g = reset_site_k(exps, phases, destab, g, L, p, j, st)
                flags[j] = 0
    return g


@njit(cache=True)
def run_flagged(exps, phases, destab, g0, L, p, T, p_rate, periodic, key,
                want_nq, want_record,
                n_cl, n_q, s_q, occupancy, reset_marks):
    """Fused trajectory loop. Arrays are caller-allocated:
    n_cl, n_q, s_q of length T+1; occupancy, reset_marks of shape (T, L)
    (1x1 dummies when want_record is false). Returns final g."""
    st = np.empty(2, np.uint64)
    st[0] = key
    st[1] = U64(0)
    flags = np.ones(L, np.uint8)
    M = np.empty((4, 4), np.int64)
    gamma = np.empty(4, np.int64)
    marks = np.empty(L, np.uint8)
    codes = np.empty(L, np.int64)
    g = g0

    n_cl[0] = 1.0
    s_q[0] = np.float64(L - g)
    if want_nq:
        det_codes(exps, phases, destab, g, L, p, codes)
        acc = 0.0
        for j in range(L):
            if codes[j] < 0:
                acc += 1.0 - 1.0 / p
            elif codes[j] != 0:
                acc += 1.0
        n_q[0] = acc / L
    for t in range(T):
        parity = t % 2
        g = brick_layer(exps, phases, destab, g, L, p, flags, p_rate, parity,
                        periodic, st, M, gamma, marks)
        nf = 0
        for j in range(L):
            nf += flags[j]
        n_cl[t + 1] = nf / L
        s_q[t + 1] = np.float64(L - g)
        if want_nq:
            det_codes(exps, phases, destab, g, L, p, codes)
            acc = 0.0
            for j in range(L):
                if flags[j] == 0:
                    continue  # sound: occupation 0
                if codes[j] < 0:
                    acc += 1.0 - 1.0 / p
                elif codes[j] != 0:
                    acc += 1.0
            n_q[t + 1] = acc / L
        if want_record:
            for j in range(L):
                occupancy[t, j] = flags[j]
                reset_marks[t, j] = marks[j]
    return g
