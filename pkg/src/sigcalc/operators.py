"""Drift/diffusion characteristics on signature state and the induced
quadratic and linear coefficient operators.

A model is given by linear functionals of the running signature: drift
components b_i and a symmetric diffusion matrix a_ij, each a tensor
coefficient vector.  The quadratic operator drives Riccati-type equations for
exponential functionals; the linear operator drives the coefficient ODE for
expectations of linear functionals.  The two are linked: the linear operator
is recovered from the quadratic one through a two-point evaluation, and on
shuffle exponentials L(exp u) = exp(u) sh R(u).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .tensor import TensorCoeffs, all_words, n_words, tables


@dataclass
class SdeSpec:
    """d-dimensional model: drift vector and diffusion matrix functionals."""

    d: int
    x0: np.ndarray
    b: list[TensorCoeffs]
    a: list[list[TensorCoeffs]]

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=np.float64).ravel()
        if len(self.x0) != self.d:
            raise ValueError("x0 must have d entries")
        if len(self.b) != self.d:
            raise ValueError("drift needs d components")
        if len(self.a) != self.d or any(len(row) != self.d for row in self.a):
            raise ValueError("diffusion must be a d x d matrix of functionals")
        N = self.b[0].N
        for c in self.b:
            if c.d != self.d or c.N != N:
                raise ValueError("all characteristics must share (d, N)")
        for i in range(self.d):
            for j in range(self.d):
                if self.a[i][j].d != self.d or self.a[i][j].N != N:
                    raise ValueError("all characteristics must share (d, N)")
                if not self.a[i][j].allclose(self.a[j][i], tol=0.0):
                    raise ValueError("diffusion matrix must be symmetric")

    @property
    def N_alg(self) -> int:
        return self.b[0].N

    def with_truncation(self, N: int) -> "SdeSpec":
        return SdeSpec(
            d=self.d,
            x0=self.x0.copy(),
            b=[c.with_truncation(N) for c in self.b],
            a=[[c.with_truncation(N) for c in row] for row in self.a],
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "N": self.N_alg,
                "x0": list(self.x0),
                "b": [c.to_text() for c in self.b],
                "a": [[c.to_text() for c in row] for row in self.a],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str, N: int | None = None) -> "SdeSpec":
        data = json.loads(text)
        d = int(data["d"])
        if N is None and "N" in data:
            N = int(data["N"])
        if N is None:
            nmax = 0
            for t in data["b"]:
                nmax = max(nmax, TensorCoeffs.from_text(t, d=d).N)
            for row in data["a"]:
                for t in row:
                    nmax = max(nmax, TensorCoeffs.from_text(t, d=d).N)
            N = nmax
        return cls(
            d=d,
            x0=np.asarray(data["x0"], dtype=np.float64),
            b=[TensorCoeffs.from_text(t, d=d, N=N) for t in data["b"]],
            a=[[TensorCoeffs.from_text(t, d=d, N=N) for t in row] for row in data["a"]],
        )


def brownian_spec(d: int, N: int, cov: np.ndarray | None = None) -> SdeSpec:
    """Driftless model with constant diffusion matrix (default identity)."""
    if cov is None:
        cov = np.eye(d)
    cov = np.asarray(cov, dtype=np.float64)
    b = [TensorCoeffs.zero(d, N) for _ in range(d)]
    a = [[TensorCoeffs.unit(d, N) * cov[i, j] for j in range(d)] for i in range(d)]
    return SdeSpec(d=d, x0=np.zeros(d), b=b, a=a)


def black_scholes_spec(sigma: float, s0: float, N: int) -> SdeSpec:
    """Time-extended lognormal diffusion: letter 1 is time, letter 2 the asset.

    The squared volatility sigma^2 S_t^2 is expressed through the running
    signature as sigma^2 (2 <e_22, X> + 2 s0 <e_2, X> + s0^2).
    """
    d = 2
    b1 = TensorCoeffs.unit(d, N)
    b2 = TensorCoeffs.zero(d, N)
    a22 = TensorCoeffs.zero(d, N)
    a22[()] = sigma**2 * s0**2
    if N >= 1:
        a22[(2,)] = 2.0 * sigma**2 * s0
    if N >= 2:
        a22[(2, 2)] = 2.0 * sigma**2
    zero = TensorCoeffs.zero(d, N)
    return SdeSpec(
        d=d, x0=np.array([0.0, s0]), b=[b1, b2], a=[[zero, zero.copy()], [zero.copy(), a22]]
    )


def _shift1_at(u: TensorCoeffs) -> list[TensorCoeffs]:
    return [c.with_truncation(u.N) for c in u.shift1()]


def _shift2_at(u: TensorCoeffs) -> list[list[TensorCoeffs]]:
    return [[c.with_truncation(u.N) for c in row] for row in u.shift2()]


def R_op(u: TensorCoeffs, spec: SdeSpec) -> TensorCoeffs:
    """Quadratic operator b.u1 + (1/2) tr(a sh (u2 + u1 u1^T))."""
    d = spec.d
    if u.d != d:
        raise ValueError("element and model disagree in dimension")
    if u.N != spec.N_alg:
        raise ValueError("element and characteristics disagree in truncation")
    u1 = _shift1_at(u)
    u2 = _shift2_at(u)
    out = TensorCoeffs.zero(d, u.N)
    for i in range(d):
        out = out + spec.b[i].shuffle(u1[i])
    for i in range(d):
        for j in range(d):
            m_ji = u2[j][i] + u1[j].shuffle(u1[i])
            out = out + 0.5 * spec.a[i][j].shuffle(m_ji)
    return out


def L_op(u: TensorCoeffs, spec: SdeSpec) -> TensorCoeffs:
    """Linear operator b.u1 + (1/2) tr(a sh u2)."""
    d = spec.d
    if u.d != d:
        raise ValueError("element and model disagree in dimension")
    if u.N != spec.N_alg:
        raise ValueError("element and characteristics disagree in truncation")
    u1 = _shift1_at(u)
    out = TensorCoeffs.zero(d, u.N)
    for i in range(d):
        out = out + spec.b[i].shuffle(u1[i])
    if u.N >= 2:
        u2 = _shift2_at(u)
        for i in range(d):
            for j in range(d):
                out = out + 0.5 * spec.a[i][j].shuffle(u2[j][i])
    return out


def poly_from_affine(u: TensorCoeffs, spec: SdeSpec, lam: float = 2.0) -> TensorCoeffs:
    """Recover the linear operator from two evaluations of the quadratic one.

    L(u) = lam/(lam-1) R(u) - 1/(lam (lam-1)) R(lam u), any lam not in {0, 1}.
    """
    if lam in (0.0, 1.0):
        raise ValueError("the mixing parameter must avoid 0 and 1")
    return (lam / (lam - 1.0)) * R_op(u, spec) - (1.0 / (lam * (lam - 1.0))) * R_op(
        u * lam, spec
    )


def linear_matrix(spec: SdeSpec, N: int) -> np.ndarray:
    """Matrix of the linear operator on the word basis of levels 0..N.

    Requires characteristics that keep the operator inside the truncation:
    diffusion entries supported on words of length <= 2 and drift entries on
    length <= 1.  Column k holds the coefficients of L(e_k).
    """
    sp = spec if spec.N_alg == N else spec.with_truncation(N)
    for i in range(spec.d):
        lvl = sp.b[i].max_support_level()
        if lvl > 1:
            raise ValueError(
                f"drift component {i + 1} involves a word of length {lvl}; "
                "the linear operator would leave the truncation"
            )
        for j in range(spec.d):
            lvl = sp.a[i][j].max_support_level()
            if lvl > 2:
                raise ValueError(
                    f"diffusion entry ({i + 1},{j + 1}) involves a word of "
                    f"length {lvl}; the linear operator would leave the truncation"
                )
    size = n_words(spec.d, N)
    G = np.zeros((size, size), dtype=np.complex128)
    for k, word in enumerate(all_words(spec.d, N)):
        G[:, k] = L_op(TensorCoeffs.basis(spec.d, N, word), sp).coeffs
    if np.all(G.imag == 0):
        return G.real.copy()
    return G


def linear_to_riccati(
    times: np.ndarray,
    c_states: list[TensorCoeffs],
    u0: TensorCoeffs,
    spec: SdeSpec,
) -> list[TensorCoeffs]:
    """Rebuild Riccati solutions from a linear-equation trajectory.

    Given c(t) with nonvanishing scalar part and c(0) = shuffle_exp(u0), the
    exponent is psi(t) = [u0_0 + int (L c)_0 / c_0] e_0 + shuffle_log(c/c_0).
    """
    times = np.asarray(times, dtype=np.float64)
    if len(times) != len(c_states):
        raise ValueError("times and states disagree in length")
    c0 = np.array([c.coeffs[0] for c in c_states])
    if np.min(np.abs(c0)) < 1e-300:
        raise ValueError(
            "scalar part of the linear solution vanishes; the exponent "
            "representation breaks down (a mixture reconstruction is needed)"
        )
    integrand = np.array(
        [L_op(c, spec).coeffs[0] / c.coeffs[0] for c in c_states]
    )
    psi0 = u0.coeffs[0] + np.concatenate(
        [[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(times))]
    )
    out = []
    for k, c in enumerate(c_states):
        bar = (c * (1.0 / c.coeffs[0])).shuffle_log()
        bar.coeffs[0] = psi0[k]
        out.append(bar)
    return out


def expected_signature_matrix(spec: SdeSpec, N: int) -> np.ndarray:
    """Generator of the expected-signature flow: transpose of linear_matrix.

    The expected truncated signature solves m'(t) = G^T m(t), m(0) = e_0.
    """
    return linear_matrix(spec, N).T.copy()
