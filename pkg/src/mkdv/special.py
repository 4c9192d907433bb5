"""Special functions for the asymptotic formulas: Airy Ai, complex log-gamma and the
connection coefficients theta(W^2), q_sigma(W) linking the two Painleve II asymptotes."""

from dataclasses import dataclass
import cmath
import math

import numpy as np

_AIRY_RANGE = 30.0

# (x0, Ai(x0), Ai'(x0)) anchors, 18 significant digits, for Taylor evaluation in the
# band where the Maclaurin series cancels badly and the asymptotics are not yet sharp.
_ANCHORS = (
    (-7.0, 0.184280835250505637, -0.771008168410126548),
    (-6.0, -0.329145173629823105, 0.345935487281342895),
    (-5.0, 0.35076100902411432, 0.327192818554443137),
    (-4.0, -0.0702655329492895151, -0.79062857536858138),
    (4.0, 0.000951563851204801874, -0.0019586409502041789),
    (5.0, 0.000108344428136074417, -0.000247413890868462476),
    (6.0, 9.94769436025288957e-6, -0.0000247652003970349548),
    (7.0, 7.49212886399716708e-7, -2.00815089473879199e-6),
    (8.0, 4.69220761609923163e-8, -1.34143929790678657e-7),
)

_AI0 = 0.355028053887817239    # 3^(-2/3) / Gamma(2/3)
_AIP0 = -0.258819403792806798  # -3^(-1/3) / Gamma(1/3)


def _ai_maclaurin(x):
    # Ai = Ai(0) f + Ai'(0) g with f, g the standard ODE power series
    f_term, g_term = 1.0, x
    f_sum, g_sum = f_term, g_term
    x3 = x ** 3
    for m in range(1, 40):
        f_term *= x3 / ((3 * m) * (3 * m - 1))
        g_term *= x3 / ((3 * m + 1) * (3 * m))
        f_sum += f_term
        g_sum += g_term
        if abs(f_term) < 1e-18 and abs(g_term) < 1e-18:
            break
    return _AI0 * f_sum + _AIP0 * g_sum


def _ai_taylor_from_anchor(x):
    x0, c0, c1 = min(_ANCHORS, key=lambda a: abs(x - a[0]))
    h = x - x0
    coeffs = [c0, c1]
    for m in range(28):
        prev = coeffs[m - 1] if m >= 1 else 0.0
        coeffs.append((x0 * coeffs[m] + prev) / ((m + 2) * (m + 1)))
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * h + c
    return acc


def _asymptotic_u_terms(zeta, kmax=24):
    # u_k / zeta^k with u_0 = 1, u_k = u_{k-1} (6k-5)(6k-1) / (72 k); truncated at the
    # smallest term (optimal truncation of the Poincare series)
    terms = [1.0]
    u = 1.0
    for k in range(1, kmax):
        u *= (6 * k - 5) * (6 * k - 1) / (72.0 * k)
        t = u / zeta ** k
        if t > abs(terms[-1]) and k > 2:
            break
        terms.append(t)
    return terms


def _ai_asymptotic_pos(x):
    zeta = (2.0 / 3.0) * x ** 1.5
    terms = _asymptotic_u_terms(zeta)
    s = sum(((-1) ** k) * t for k, t in enumerate(terms))
    return 0.5 / math.sqrt(math.pi) * x ** -0.25 * math.exp(-zeta) * s


def _ai_asymptotic_neg(x):
    # x = |argument|; DLMF 9.7.9 oscillatory expansion
    zeta = (2.0 / 3.0) * x ** 1.5
    terms = _asymptotic_u_terms(zeta)
    p = sum(((-1) ** k) * t for k, t in enumerate(terms[0::2]))
    q = sum(((-1) ** k) * t for k, t in enumerate(terms[1::2]))
    c, s = math.cos(zeta - math.pi / 4), math.sin(zeta - math.pi / 4)
    return (c * p + s * q) / (math.sqrt(math.pi) * x ** 0.25)


def _airy_scalar(x):
    ax = abs(x)
    if ax <= 3.5:
        return _ai_maclaurin(x)
    if -7.5 <= x < -3.5 or 3.5 < x <= 8.5:
        return _ai_taylor_from_anchor(x)
    if x > 8.5:
        return _ai_asymptotic_pos(x)
    return _ai_asymptotic_neg(-x)


def airy_ai(x):
    """Airy Ai on the working range |x| <= 30; absolute error below 1e-10.

    Maclaurin series near the origin, anchored Taylor steps through the matching band,
    asymptotic expansions with exponential prefactors beyond.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(arr) > _AIRY_RANGE):
        raise ValueError(f"airy_ai working range is |x| <= {_AIRY_RANGE}")
    if arr.ndim == 0:
        return _airy_scalar(float(arr))
    out = np.empty_like(arr)
    flat = arr.ravel()
    res = out.ravel()
    for i, v in enumerate(flat):
        res[i] = _airy_scalar(float(v))
    return out


# Lanczos g=7 coefficients (Godfrey set), ~15 significant digits on the half-plane
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(z):
    """Principal-branch log Gamma via Lanczos plus reflection on the left half-plane."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise ValueError(f"log_gamma pole at z={z}")
    if z.real < 0.5:
        # log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z), mod 2 pi i
        return cmath.log(cmath.pi) - cmath.log(cmath.sin(cmath.pi * z)) - log_gamma(1.0 - z)
    w = z - 1.0
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (w + i)
    t = w + 7.5
    return _LOG_SQRT_2PI + (w + 0.5) * cmath.log(t) - t + cmath.log(acc)


def theta_correction(W):
    """Phase offset theta(W^2) = (9 log 2 / 4 pi) W^2 - arg Gamma(3i W^2 / 4 pi) - pi / 2."""
    W = float(W)
    if W == 0.0:
        return 0.0
    w2 = W * W
    arg_gamma = log_gamma(1j * (3.0 / (4.0 * math.pi)) * w2).imag
    return (9.0 * math.log(2.0) / (4.0 * math.pi)) * w2 - arg_gamma - math.pi / 2.0


def q_sigma(W, sigma):
    """Airy-side amplitude q_sigma(W) = sgn(W) ((2 sigma / 3)(1 - e^{-(3 sigma/2) W^2}))^(1/2).

    For sigma = -1 the formula is restricted to |W| <= 1 (smallness hypothesis of the
    connection result); larger W is rejected.
    """
    if sigma not in (1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    W = float(W)
    if sigma == -1 and abs(W) > 1.0:
        raise ValueError(f"q_sigma with sigma=-1 requires |W| <= 1, got {W}")
    radicand = -(2.0 * sigma / 3.0) * math.expm1(-1.5 * sigma * W * W)
    return math.copysign(math.sqrt(radicand), W) if W != 0.0 else 0.0


@dataclass(frozen=True)
class ConnectionCoefficients:
    theta: float
    q: float
    W: float
    sigma: int


def connection_coefficients(W, sigma):
    """Bundle theta(W^2) and q_sigma(W) for a given real W."""
    return ConnectionCoefficients(theta=theta_correction(W), q=q_sigma(W, sigma),
                                  W=float(W), sigma=int(sigma))
