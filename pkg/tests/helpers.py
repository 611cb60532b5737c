"""Random test instances shared by several test modules."""
import numpy as np

from specfact.factorization import outer_inner
from specfact.rational import RationalMatrix
from specfact.realization import StateSpaceRealization, transfer_of


def random_stable_matrix(rng, n, variable, margin=0.1):
    """Real ``n x n`` matrix with eigenvalues at least ``margin`` inside the region."""
    eig = []
    while len(eig) < n:
        if n - len(eig) >= 2 and rng.random() < 0.4:
            if variable == "z":
                r = rng.uniform(0.05, 1 - margin)
                th = rng.uniform(0.2, np.pi - 0.2)
                lam = r * np.exp(1j * th)
            else:
                lam = complex(-rng.uniform(margin, 3.0), rng.uniform(0.3, 2.0))
            eig.append(lam)
            eig.append(np.conj(lam))
        else:
            if variable == "z":
                eig.append(rng.uniform(-(1 - margin), 1 - margin))
            else:
                eig.append(-rng.uniform(margin, 3.0))
    blocks = []
    i = 0
    while i < n:
        lam = eig[i]
        if isinstance(lam, complex) and lam.imag != 0:
            blocks.append(np.array([[lam.real, lam.imag], [-lam.imag, lam.real]]))
            i += 2
        else:
            blocks.append(np.array([[float(np.real(lam))]]))
            i += 1
    A = np.zeros((n, n))
    k = 0
    for b in blocks:
        d = b.shape[0]
        A[k:k + d, k:k + d] = b
        k += d
    T = rng.standard_normal((n, n)) + 2 * np.eye(n)
    return T @ A @ np.linalg.inv(T)


def random_minimum_phase_factor(rng, m, p, n, variable):
    """Random stable tall factor ``(m+p) x m`` of McMillan degree ``n``.

    Tall generic systems have no transmission zeros, and ``D`` has full column
    rank, so the factor is minimum phase.
    """
    A = random_stable_matrix(rng, n, variable)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((m + p, n))
    D = rng.standard_normal((m + p, m))
    R = StateSpaceRealization(A, B, C, D, variable, 0)
    return transfer_of(R)


def well_conditioned(W, m, bound=50.0, margin=1e-2):
    """Zeros of the leading block lie in a bounded region clear of the boundary.

    Zeros of ``W[:m]`` become poles of the relation ``H``; very large or
    near-boundary ones make the problem ill-conditioned.
    """
    z = W[:m, :].zeros()
    if W.variable == "z":
        r = np.abs(z)
        return bool(np.all((r < bound) & (r > 1 / bound) & (np.abs(r - 1) > margin)))
    return bool(np.all((np.abs(z) < bound) & (np.abs(z.real) > margin)))


def square_factor_of_block(W, m):
    """Minimum-phase ``G1`` of ``W1 W1*`` from the leading block of ``W``."""
    G1, _ = outer_inner(W[:m, :])
    return G1


# ---------------------------------------------------------------------------
# worked examples
# ---------------------------------------------------------------------------

from specfact.polynomial import RationalFunction, poly_from_roots  # noqa: E402


def zpk(zeros, poles, gain=1.0, variable="z"):
    """Scalar rational function from real or conjugate-paired roots."""
    return RationalFunction(poly_from_roots(zeros, gain), poly_from_roots(poles), variable)


I = 1j


def stable_relation_example():
    """``G1`` and stable ``H`` of the first discrete example."""
    G1 = RationalMatrix([[zpk([-.4, -.3], [-.2, -.1]), 0], [0, zpk([-.3], [-.5])]])
    H = RationalMatrix([[zpk([-.1], [-.3]), 1]])
    return G1, H


def stable_relation_W():
    W1 = [[zpk([-.4, -.3], [-.2, -.1]), 0], [0, zpk([-.3], [-.5])]]
    return RationalMatrix(W1 + [[zpk([-.4], [-.2]), zpk([-.3], [-.5])]])


def continuous_Wo():
    """Stable, non-minimum-phase ``3 x 2`` factor of the continuous example."""
    s = lambda zs, ps, k=1.0: zpk(zs, ps, k, "s")  # noqa: E731
    Wo1 = RationalMatrix([[s([-1, 2, 1 + I, 1 - I], [-3, -4, -1 + I, -1 - I]), 0],
                          [0, s([-3, 1], [-1, -5])]], "s")
    Wo2 = RationalMatrix([[s([-1, -1, 2, -2], [-4, -4, -1 + I, -1 - I]), s([-3], [-4])]], "s")
    return RationalMatrix.vstack([Wo1, Wo2])


def continuous_realization():
    """Hand-built minimal realization of ``(H G1)^T`` for the continuous example."""
    A = np.zeros((5, 5))
    A[:2, :2] = [[0, 1], [-2, 2]]
    A[2, 2] = 1
    A[3:, 3:] = [[-4, 1], [0, -4]]
    B = np.array([[0], [25 / 169], [8 / 5], [10 / 13], [-3 / 5]])
    C = np.array([[-7, 12, 0, -30 / 13, 0], [0, 0, 1, 0, 1]])
    D = np.array([[1.0], [1.0]])
    return StateSpaceRealization(A, B, C, D, "s", 3)


def continuous_T():
    s = lambda zs, ps, k=1.0: zpk(zs, ps, k, "s")  # noqa: E731
    return RationalMatrix([[s([-1, -1, -2, -2], [-4, -4, 1 + I, 1 - I])],
                           [s([-1, -3], [1, -4])]], "s")


def estimated_inputs():
    """Estimated ``G1`` and ``H`` of the discrete identification example."""
    G1 = RationalMatrix([[zpk([-.528], [.255])]])
    H = RationalMatrix([[zpk([2], [-2])], [zpk([1], [-2])]])
    return G1, H


def estimated_W():
    c = zpk([-.528], [-.5, .255], 0.5)
    return RationalMatrix([[c * zpk([-2], [])], [c * zpk([2], [])], [c * zpk([1], [])]])


def generating_Wo():
    """True generating filter ``[(z+2); (z-2); (z-1)] / (5z-1)``."""
    return RationalMatrix([[zpk([-2], [.2], .2)], [zpk([2], [.2], .2)], [zpk([1], [.2], .2)]])


# ---------------------------------------------------------------------------
# Sylvester-type equations
# ---------------------------------------------------------------------------

def constructed_violations():
    """Ten equations without a unique solution, each with a known witness."""
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
    cases = []
    for lam in (2.0, -3.0, 0.25, 1.0 + 1e-12):
        cases.append(("stein", np.diag([lam, 1.0 / lam])))
    cases.append(("stein", np.diag([5.0, 1.0, -4.0])))          # eigenvalue on the circle
    cases.append(("stein", 1.3 * np.array([[np.cos(.4), -np.sin(.4)],
                                           [np.sin(.4), np.cos(.4)]]) @ np.diag([1, 1 / 1.69])))
    for mu in (1.0, 0.5):
        cases.append(("lyap", np.diag([mu, -mu])))
    cases.append(("lyap", rot))                                  # +-i sums to zero
    cases.append(("lyap", np.diag([2.0, 0.0])))                  # zero eigenvalue
    return cases


def unstable_matrix(rng, n, var):
    while True:
        A = rng.standard_normal((n, n)) * 2
        eig = np.linalg.eigvals(A)
        if var == "z" and np.all(np.abs(eig) > 1.1):
            return A
        if var == "s" and np.all(eig.real > 0.1):
            return A
        if var == "s":
            A = A + (0.1 - eig.real.min() + rng.random()) * np.eye(n)
            return A


def stein_series(A, C, terms=400):
    Ai = np.linalg.inv(A)
    Q = C.T @ C
    X = np.zeros_like(Q)
    P = Ai
    for _ in range(terms):
        X -= P.T @ Q @ P
        P = P @ Ai
    return X
