"""Closed-form reference values.

Rational quantities are kept as :class:`fractions.Fraction` so internal
consistency identities can be checked exactly; ``floats()`` converts for
comparison with Monte Carlo output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from scipy import integrate


@dataclass(frozen=True)
class ClosedForm:
    name: str
    parameters: dict
    values: dict
    functions: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        return self.functions[key]

    def floats(self) -> dict:
        return {k: float(v) for k, v in self.values.items()}

    def to_dict(self) -> dict:
        return {"name": self.name, "parameters": dict(self.parameters), "values": self.floats(),
                "exact": {k: str(v) for k, v in self.values.items() if isinstance(v, Fraction)}}


def _check_nk(n, k):
    if not (isinstance(n, int) and isinstance(k, int)):
        raise TypeError("n and k must be integers")
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1 for a bridgeless U(n,k), got n={n}, k={k}")


def uniform_matroid_uniform_stats(n: int, k: int) -> ClosedForm:
    """Means and variances for ``U_{n,k}`` with i.i.d. U(0,1) costs."""
    _check_nk(n, k)
    F = Fraction
    e_cstar = F(k * (k + 1), 2 * (n + 1))
    e_vcg = F(k * (k + 1), n + 1)
    var_cstar = F(k * (k + 1) * (4 * n * k + 2 * n + k + 2 - 3 * k * k), 12 * (n + 1) ** 2 * (n + 2))
    var_vcg = F(k * k * (k + 1) * (n - k), (n + 1) ** 2 * (n + 2))
    var_diff = F(k * (k + 1) * (k + 2), 3 * (n + 1) * (n + 2))
    return ClosedForm("uniform_matroid_uniform", {"n": n, "k": k},
                      {"E_cstar": e_cstar, "E_vcg": e_vcg, "Var_cstar": var_cstar,
                       "Var_vcg": var_vcg, "Var_diff": var_diff})


def uniform_matroid_exponential_means(n: int, k: int) -> ClosedForm:
    """``U_{n,k}`` with i.i.d. Exp(1) costs, via exponential spacings."""
    _check_nk(n, k)
    e_cstar = sum(Fraction(j, n - k + j) for j in range(1, k + 1))
    e_vcg = k * sum(Fraction(1, n - j + 1) for j in range(1, k + 2))
    return ClosedForm("uniform_matroid_exponential", {"n": n, "k": k},
                      {"E_cstar": e_cstar, "E_vcg": e_vcg})


# -- the three-edge path family: structures {X1} and {X2, X3} ---------------

def k3_path_density(x: float, y: float) -> float:
    """Joint density of ``(c*, VCG total)`` under U(0,1) costs."""
    if not (0 <= x <= 1 and 0 <= y <= 2):
        raise ValueError(f"({x}, {y}) outside [0,1] x [0,2]")
    f = 0.0
    if x <= y <= 1:
        f += y
    if 1 < y <= 2:
        f += 2 - y
    if x <= min(y, 2 - y):
        f += x / 2
    return f


def k3_path_vcg_density(y: float) -> float:
    if not 0 <= y <= 2:
        raise ValueError(f"y={y} outside [0, 2]")
    if y <= 1:
        return 1.25 * y * y
    return (2 - y) + 0.25 * (2 - y) ** 2


def _k3_path_first_moment(y: float) -> float:
    # integral of x f(x, y) over x
    if y <= 1:
        return 2 * y ** 3 / 3
    return 0.5 * (2 - y) + (2 - y) ** 3 / 6


def k3_path_cond_mean(y: float) -> float:
    """``E[c* | VCG total = y]``; decreasing on part of ``[1, 2]``."""
    if not 0 < y < 2:
        raise ValueError(f"y={y} outside (0, 2)")
    if y <= 1:
        return 8 * y / 15
    return (6 + 2 * (2 - y) ** 2) / (12 + 3 * (2 - y))


def k3_path_bin_mean(lo: float, hi: float) -> float:
    """``E[c* | lo <= VCG total < hi]`` by quadrature."""
    if not 0 <= lo < hi <= 2:
        raise ValueError(f"bin [{lo}, {hi}) outside [0, 2]")
    pts = [1.0] if lo < 1 < hi else None
    num, _ = integrate.quad(_k3_path_first_moment, lo, hi, points=pts, epsabs=1e-13)
    den, _ = integrate.quad(k3_path_vcg_density, lo, hi, points=pts, epsabs=1e-13)
    return num / den


def k3_path_uniform_stats() -> ClosedForm:
    return ClosedForm("k3_path_uniform", {},
                      {"E_cstar": Fraction(11, 24), "E_vcg": Fraction(13, 12)},
                      {"density": k3_path_density, "vcg_density": k3_path_vcg_density,
                       "cond_mean": k3_path_cond_mean, "bin_mean": k3_path_bin_mean})


def k3_path_exponential_means() -> ClosedForm:
    return ClosedForm("k3_path_exponential", {}, {"E_cstar": Fraction(3, 4), "E_vcg": Fraction(5, 2)})


# -- minimum spanning trees -------------------------------------------------

_ZETA_TERMS = 64


def zeta(s: int) -> float:
    """Riemann zeta for integer ``s >= 2``: partial sum plus an Euler-Maclaurin tail.

    With 64 terms and corrections through ``B_6`` the error is far below 1e-15.
    """
    if s < 2:
        raise ValueError("zeta(s) needs s >= 2")
    N = _ZETA_TERMS
    head = math.fsum(j ** -s for j in range(1, N))
    tail = (N ** (1 - s) / (s - 1) + 0.5 * N ** -s + s * N ** (-s - 1) / 12
            - s * (s + 1) * (s + 2) * N ** (-s - 3) / 720
            + s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * N ** (-s - 5) / 30240)
    return head + tail


def mst_constants() -> ClosedForm:
    """Limits for the MST of ``K_n`` with U(0,1) edge costs as ``n`` grows."""
    z3, z4 = zeta(3), zeta(4)
    return ClosedForm("mst", {}, {"zeta3": z3, "zeta4": z4, "two_zeta3": 2 * z3,
                                  "var_cstar_coeff": 6 * z4 - 4 * z3,
                                  "var_vcg_coeff": 24 * z4 - 18 * z3})


def beta_ratio(alpha: float) -> float:
    """``E c* / E VCG`` for Beta(alpha, 1) costs on a bridgeless matroid."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return alpha / (alpha + 1)


def all_constants() -> dict:
    """Everything above with concrete parameters, for JSON fixtures."""
    out = {}
    for n, k in [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3)]:
        out[f"uniform_matroid_uniform[{n},{k}]"] = uniform_matroid_uniform_stats(n, k).to_dict()
        out[f"uniform_matroid_exponential[{n},{k}]"] = uniform_matroid_exponential_means(n, k).to_dict()
    out["k3_path_uniform"] = k3_path_uniform_stats().to_dict()
    out["k3_path_uniform"]["values"]["cond_mean_at_1"] = k3_path_cond_mean(1.0)
    out["k3_path_exponential"] = k3_path_exponential_means().to_dict()
    out["mst"] = mst_constants().to_dict()
    out["beta_ratio"] = {str(a): beta_ratio(a) for a in (0.5, 1.0, 2.0)}
    return out


ORACLE_FUNCTIONS: dict[str, Callable] = {
    "uniform_matroid_uniform_stats": uniform_matroid_uniform_stats,
    "uniform_matroid_exponential_means": uniform_matroid_exponential_means,
    "k3_path_uniform_stats": k3_path_uniform_stats,
    "k3_path_exponential_means": k3_path_exponential_means,
    "mst_constants": mst_constants,
    "beta_ratio": beta_ratio,
}
