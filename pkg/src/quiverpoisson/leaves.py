"""Floating-point verification layer for the two-matrix geometry.

Everything here works on Rep of the two-loop quiver at dimension k, i.e.
pairs (X, Y) of k x k real matrices, with coordinates ordered X row-major
then Y row-major (2 k^2 in total).  The bivector matrix of a grade-2
element is assembled from its commutator presentation; it uses the
geometric normalization (half the bracket-table values of the symbolic
layer), which is the scale at which the displayed symplectic forms invert
the structures with unit residual:

    form (i)   tr dY ^ d(X Y^-1)        for [xx', x'] + [yx', y'],
    form (ii)  tr d(YX)^-1 ^ dX         for [yy', yxx' + y^2 y'],
    inverse-x  tr d(X^-1) ^ dY          for [xy', xx'],
    family     tr d(Y^-1 - eps X)^-1 ^ d(X (Y^-1 - eps X)).

All matrix-calculus derivatives are analytic; only the Lie-derivative
consistency check is finite-difference, deliberately, as an independent
oracle.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .necklace import NecklaceElement, commutator_pairs
from .parsing import parse_necklace
from .quiver import QuiverError, is_trivial, loop_quiver

TWO_LOOPS = loop_quiver("xy")

LIN_SRC = "[x x', x'] + [y x', y']"
CUBIC_SRC = "[y y', y x x' + y y y']"
INVERSE_X_SRC = "[x y', x x']"


def linear_structure() -> NecklaceElement:
    return parse_necklace(LIN_SRC, TWO_LOOPS)


def cubic_structure() -> NecklaceElement:
    return parse_necklace(CUBIC_SRC, TWO_LOOPS)


def family_structure(eps) -> NecklaceElement:
    return linear_structure() + cubic_structure().scale(Fraction(eps))


def deformation_direction() -> NecklaceElement:
    """The grade-1 element whose flow deforms the linear structure."""
    return parse_necklace("y x y y'", TWO_LOOPS)


class NumericPoint:
    """A pair (X, Y) of k x k float matrices."""

    def __init__(self, X, Y):
        self.X = np.asarray(X, dtype=float)
        self.Y = np.asarray(Y, dtype=float)
        if self.X.shape != self.Y.shape or self.X.shape[0] != self.X.shape[1]:
            raise QuiverError("X and Y must be square of equal size")
        if not (np.isfinite(self.X).all() and np.isfinite(self.Y).all()):
            raise QuiverError("point entries must be finite")
        self.k = self.X.shape[0]


def random_point(k, rng, invertible=(), cond=1e-3, scale=1.0):
    """Entries uniform in [-scale, scale]; matrices named in `invertible`
    ('x', 'y', or a callable on the point) are retried until well
    conditioned."""
    while True:
        p = NumericPoint(rng.uniform(-scale, scale, (k, k)),
                         rng.uniform(-scale, scale, (k, k)))
        ok = True
        for req in invertible:
            mat = {"x": p.X, "y": p.Y}[req] if isinstance(req, str) else req(p)
            sv = np.linalg.svd(mat, compute_uv=False)
            if sv[-1] <= cond * sv[0]:
                ok = False
                break
        if ok:
            return p


def _coord_split(k, vec):
    return vec[:k * k].reshape(k, k), vec[k * k:].reshape(k, k)


def _word_value(word, X, Y, k):
    if is_trivial(word):
        return np.eye(k)
    mats = {0: X, 1: Y}
    out = np.eye(k)
    for letter in word:
        out = out @ mats[letter]
    return out


def _word_derivative(word, X, Y, k, arrow, r, c):
    """d/d(arrow)_{rc} of the evaluated word, by the product rule."""
    if is_trivial(word):
        return np.zeros((k, k))
    mats = {0: X, 1: Y}
    E = np.zeros((k, k))
    E[r, c] = 1.0
    total = np.zeros((k, k))
    for i, letter in enumerate(word):
        if letter != arrow:
            continue
        left = np.eye(k)
        for l in word[:i]:
            left = left @ mats[l]
        right = np.eye(k)
        for l in word[i + 1:]:
            right = right @ mats[l]
        total += left @ E @ right
    return total


def _entries(pi: NecklaceElement):
    """(coeff, P word, a, R word, b) with the geometric normalization."""
    return [(float(c), P, a, R, b) for c, P, a, R, b in commutator_pairs(pi)]


def bivector_at(pi: NecklaceElement, k: int, p: NumericPoint) -> np.ndarray:
    """The 2k^2 x 2k^2 matrix of coordinate brackets at a point.

    B[(a,i,j), (b,k,l)] = sum over entries with slots (a, b) of
    coeff * P(X,Y)_{kj} R(X,Y)_{il}; antisymmetric by the flip symmetry of
    the presentation.
    """
    if pi.dq.base != TWO_LOOPS:
        raise QuiverError("the numeric layer works on the two-loop quiver")
    n = p.k
    if n != k:
        raise QuiverError("point size does not match k")
    B = np.zeros((2 * k * k, 2 * k * k))
    for coeff, P, a, R, b in _entries(pi):
        Pv = _word_value(P, p.X, p.Y, k)
        Rv = _word_value(R, p.X, p.Y, k)
        # {a_ij, b_kl} += coeff * P_{kj} R_{il}
        for i in range(k):
            for j in range(k):
                row = a * k * k + i * k + j
                for kk in range(k):
                    for ll in range(k):
                        col = b * k * k + kk * k + ll
                        B[row, col] += coeff * Pv[kk, j] * Rv[i, ll]
    if not np.isfinite(B).all():
        raise QuiverError("bivector has non-finite entries")
    return B


def bivector_derivatives(pi: NecklaceElement, k: int, p: NumericPoint):
    """dB/dz for every coordinate z, as an array (2k^2, 2k^2, 2k^2)."""
    n2 = 2 * k * k
    out = np.zeros((n2, n2, n2))
    for coeff, P, a, R, b in _entries(pi):
        Pv = _word_value(P, p.X, p.Y, k)
        Rv = _word_value(R, p.X, p.Y, k)
        for arrow in (0, 1):
            for r in range(k):
                for c in range(k):
                    z = arrow * k * k + r * k + c
                    dP = _word_derivative(P, p.X, p.Y, k, arrow, r, c)
                    dR = _word_derivative(R, p.X, p.Y, k, arrow, r, c)
                    for i in range(k):
                        for j in range(k):
                            row = a * k * k + i * k + j
                            for kk in range(k):
                                for ll in range(k):
                                    col = b * k * k + kk * k + ll
                                    out[z, row, col] += coeff * (
                                        dP[kk, j] * Rv[i, ll]
                                        + Pv[kk, j] * dR[i, ll])
    return out


def antisymmetry_defect(B) -> float:
    scale = max(1.0, float(np.abs(B).max()))
    return float(np.abs(B + B.T).max()) / scale


def leaf_rank(B, tol_factor=1e-9) -> int:
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int((sv > tol_factor * sv[0]).sum())


# -- symplectic forms --------------------------------------------------------

def _form_matrix(k, p: NumericPoint, dF, dG):
    """omega = tr dF ^ dG as a matrix over coordinate basis tangents:
    omega(u, v) = tr(dF(u) dG(v)) - tr(dF(v) dG(u))."""
    n2 = 2 * k * k
    dFs = np.zeros((n2, k, k))
    dGs = np.zeros((n2, k, k))
    for z in range(n2):
        tangent = np.zeros(n2)
        tangent[z] = 1.0
        xi, eta = _coord_split(k, tangent)
        dFs[z] = dF(xi, eta)
        dGs[z] = dG(xi, eta)
    omega = np.zeros((n2, n2))
    for u in range(n2):
        for v in range(n2):
            omega[u, v] = np.trace(dFs[u] @ dGs[v]) - np.trace(
                dFs[v] @ dGs[u])
    return omega


def symplectic_form_matrix(form: str, k: int, p: NumericPoint,
                           eps: float = 1.0) -> np.ndarray:
    """Assemble a named form at a point by analytic directional derivatives.

    Forms: 'i' needs Y invertible; 'ii' needs X and Y invertible;
    'inverse-x' needs X invertible; 'bb' needs Y and Y^-1 - eps X
    invertible.
    """
    X, Y = p.X, p.Y
    k_ = p.k
    if k_ != k:
        raise QuiverError("point size does not match k")

    def inv(mat, what):
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[-1] <= 1e-12 * max(sv[0], 1.0):
            raise QuiverError(f"{what} is singular at this point")
        return np.linalg.inv(mat)

    if form == "i":
        Yi = inv(Y, "Y")
        dF = lambda xi, eta: eta
        dG = lambda xi, eta: xi @ Yi - X @ Yi @ eta @ Yi
    elif form == "ii":
        YX = Y @ X
        YXi = inv(YX, "YX")
        dF = lambda xi, eta: -YXi @ (eta @ X + Y @ xi) @ YXi
        dG = lambda xi, eta: xi
    elif form == "inverse-x":
        Xi = inv(X, "X")
        dF = lambda xi, eta: -Xi @ xi @ Xi
        dG = lambda xi, eta: eta
    elif form == "bb":
        Yi = inv(Y, "Y")
        W = Y_eps = Yi - eps * X
        Wi = inv(W, "Y^-1 - eps X")
        dW = lambda xi, eta: -Yi @ eta @ Yi - eps * xi
        dF = lambda xi, eta: -Wi @ dW(xi, eta) @ Wi
        dG = lambda xi, eta: xi @ W + X @ dW(xi, eta)
    else:
        raise QuiverError(f"unknown form {form!r}")
    return _form_matrix(k, p, dF, dG)


def inversion_residual(omega, B):
    """min over sign of max|omega B -+ I| (relative to the product scale);
    returns (residual, matched sign)."""
    prod = omega @ B
    n = prod.shape[0]
    eye = np.eye(n)
    scale = max(1.0, float(np.abs(prod).max()))
    plus = float(np.abs(prod - eye).max()) / scale
    minus = float(np.abs(prod + eye).max()) / scale
    return (plus, +1) if plus <= minus else (minus, -1)


FORM_OF_STRUCTURE = {
    "i": LIN_SRC,
    "ii": CUBIC_SRC,
    "inverse-x": INVERSE_X_SRC,
}


def symplectic_check(form: str, k: int, p: NumericPoint, eps: float = 1.0):
    """(residual, sign) of the named form against its matching structure."""
    if form == "bb":
        pi = family_structure(Fraction(eps).limit_denominator(10 ** 6))
    else:
        pi = parse_necklace(FORM_OF_STRUCTURE[form], TWO_LOOPS)
    B = bivector_at(pi, k, p)
    omega = symplectic_form_matrix(form, k, p, eps=eps)
    return inversion_residual(omega, B)


# -- the deformation flow ----------------------------------------------------

def flow(t: float, p: NumericPoint) -> NumericPoint:
    """(X, Y) -> (X, (Y^-1 - t X)^-1)."""
    Yi = np.linalg.inv(p.Y)
    W = Yi - t * p.X
    return NumericPoint(p.X.copy(), np.linalg.inv(W))


def flow_jacobian(t: float, p: NumericPoint):
    """The analytic differential of the flow at p, as a 2k^2 x 2k^2 matrix."""
    k = p.k
    Yi = np.linalg.inv(p.Y)
    W = np.linalg.inv(Yi - t * p.X)
    n2 = 2 * k * k
    J = np.zeros((n2, n2))
    for z in range(n2):
        tangent = np.zeros(n2)
        tangent[z] = 1.0
        xi, eta = _coord_split(k, tangent)
        dY_new = W @ (Yi @ eta @ Yi + t * xi) @ W
        J[:, z] = np.concatenate([xi.ravel(), dY_new.ravel()])
    return J


def flow_group_law_residual(s: float, t: float, p: NumericPoint) -> float:
    q1 = flow(s, flow(t, p))
    q2 = flow(s + t, p)
    scale = max(1.0, float(np.abs(q2.Y).max()))
    return float(max(np.abs(q1.X - q2.X).max(),
                     np.abs(q1.Y - q2.Y).max())) / scale


def gamma_field(p: NumericPoint):
    """The deformation vector field at a point: (0, Y X Y)."""
    return np.zeros_like(p.X), p.Y @ p.X @ p.Y


def pushforward_residual(eps: float, k: int, p: NumericPoint):
    """Compare the flow pushforward of the linear structure with the family
    member at the transported point, both transport directions; returns
    (best residual, direction sign that matched)."""
    B0 = bivector_at(linear_structure(), k, p)
    pi_eps = family_structure(Fraction(eps).limit_denominator(10 ** 6))
    results = []
    for sgn in (+1, -1):
        q = flow(sgn * eps, p)
        J = flow_jacobian(sgn * eps, p)
        pushed = J @ B0 @ J.T
        target = bivector_at(pi_eps, k, q)
        scale = max(1.0, float(np.abs(target).max()))
        results.append((float(np.abs(pushed - target).max()) / scale, sgn))
    return min(results)


def _midpoint_step(h: float, p: NumericPoint):
    """One explicit midpoint step of the deformation field, with its
    analytic step Jacobian.  Deliberately avoids the closed-form flow so
    the Lie-derivative check is an independent oracle; the step deviates
    from the true flow by O(h^3)."""
    k = p.k

    def gamma(X, Y):
        return np.zeros((k, k)), Y @ X @ Y

    def gamma_diff(X, Y, xi, eta):
        return np.zeros((k, k)), eta @ X @ Y + Y @ xi @ Y + Y @ X @ eta

    gX, gY = gamma(p.X, p.Y)
    Xm, Ym = p.X + 0.5 * h * gX, p.Y + 0.5 * h * gY
    gmX, gmY = gamma(Xm, Ym)
    out = NumericPoint(p.X + h * gmX, p.Y + h * gmY)

    n2 = 2 * k * k
    J = np.zeros((n2, n2))
    for z in range(n2):
        tangent = np.zeros(n2)
        tangent[z] = 1.0
        xi, eta = _coord_split(k, tangent)
        dgX, dgY = gamma_diff(p.X, p.Y, xi, eta)
        dXm, dYm = xi + 0.5 * h * dgX, eta + 0.5 * h * dgY
        dmX, dmY = gamma_diff(Xm, Ym, dXm, dYm)
        J[:, z] = np.concatenate([(xi + h * dmX).ravel(),
                                  (eta + h * dmY).ravel()])
    return out, J


def lie_derivative_residual(h: float, k: int, p: NumericPoint) -> float:
    """Central finite-difference Lie derivative of the linear structure
    along the deformation field, against the cubic structure.

    Points are transported by single midpoint steps of the field (not the
    closed-form flow), so the estimate carries an honest O(h^2) error; the
    exact-flow transport would be exact here because the transported
    structure is affine in the flow time.
    """
    pi0 = linear_structure()

    def pulled(t):
        # ((step_{-t})_* B0)(p) ~ J_{-t}(q) B0(q) J_{-t}^T at q = step_t(p)
        q, _ = _midpoint_step(t, p)
        _, J = _midpoint_step(-t, q)
        return J @ bivector_at(pi0, k, q) @ J.T

    lie = (pulled(h) - pulled(-h)) / (2 * h)
    target = bivector_at(cubic_structure(), k, p)
    scale = max(1.0, float(np.abs(target).max()))
    return float(np.abs(lie - target).max()) / scale


# -- Hamiltonians ------------------------------------------------------------

def trace_power_gradient(p: NumericPoint, which: str, power: int):
    """Coordinate gradient of tr M^power for M = X or Y."""
    k = p.k
    M = p.X if which == "x" else p.Y
    Mp = np.linalg.matrix_power(M, power - 1) if power > 1 else np.eye(k)
    grad_block = power * Mp.T
    grad = np.zeros(2 * k * k)
    off = 0 if which == "x" else k * k
    grad[off:off + k * k] = grad_block.ravel()
    return grad


def poisson_bracket_functions(B, grad_f, grad_g) -> float:
    return float(grad_f @ B @ grad_g)


def hamiltonian_commutation(k: int, p: NumericPoint):
    """max |{tr X^i, tr X^j}| over 1 <= i < j <= k under the linear
    structure, and the negative control |{tr X, tr Y}|."""
    B = bivector_at(linear_structure(), k, p)
    worst = 0.0
    for i in range(1, k + 1):
        gi = trace_power_gradient(p, "x", i)
        for j in range(i, k + 1):
            gj = trace_power_gradient(p, "x", j)
            worst = max(worst, abs(poisson_bracket_functions(B, gi, gj)))
    control = abs(poisson_bracket_functions(
        B, trace_power_gradient(p, "x", 1), trace_power_gradient(p, "y", 1)))
    return worst, control


def jacobiator_residual(pi: NecklaceElement, k: int, p: NumericPoint) -> float:
    """max over coordinate triples of {f,{g,h}} + cyclic, from the analytic
    derivatives of the bracket matrix."""
    B = bivector_at(pi, k, p)
    dB = bivector_derivatives(pi, k, p)
    n2 = 2 * k * k
    # jac[p,q,r] = sum_s B[p,s] dB[s,q,r] + B[q,s] dB[s,r,p] + B[r,s] dB[s,p,q]
    term = np.einsum("ps,sqr->pqr", B, dB)
    jac = term + np.transpose(term, (1, 2, 0)) + np.transpose(term, (2, 0, 1))
    scale = max(1.0, float(np.abs(B).max()) ** 2)
    return float(np.abs(jac).max()) / scale
