"""
Catálogo de coeficientes a_ij e potenciais singulares V com expoentes previstos do ground state

Cada entrada de expoente guarda a constante c do termo c/d_k² junto ao estrato;
o expoente previsto sai de c pela fórmula α = (2 − k + √((k−2)² − 4c))/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np
import structlog

from hardyheat.core.errors import (
    AsymmetricCoefficient,
    HardyConstantExceeded,
    IncompatibleCoefficients,
    OverlappingSingularities,
    ParameterOutOfRange,
)
from hardyheat.core.geometry import (
    StratifiedDomain,
    Stratum,
    StratumGeometry,
    as_points,
    stratum_distance,
)

logger = structlog.get_logger(__name__)

CoeffFn = Callable[[np.ndarray], np.ndarray]
PotentialFn = Callable[[np.ndarray, bool], np.ndarray]

_ASYMMETRY_TOL = 1e-12


class Lambda1Hint(str, Enum):
    POSITIVE = "Positive"
    FINITE_UNKNOWN = "FiniteUnknown"


def hardy_threshold(k: int) -> float:
    """Constante de Hardy do estrato de codimensão k: (k−2)²/4"""
    return 0.25 * (k - 2) ** 2


def hardy_exponent(k: int, c: float) -> float:
    """Expoente α do ground state junto a um estrato de codim k com V ≈ c/d_k²"""
    disc = (k - 2) ** 2 - 4.0 * c
    if disc < -1e-14:
        raise HardyConstantExceeded(
            f"constante {c} excede a constante de Hardy {hardy_threshold(k)} para codim {k}", k=k, c=c
        )
    return 0.5 * (2 - k + math.sqrt(max(disc, 0.0)))


@dataclass(frozen=True)
class ExponentEntry:
    """Expoente previsto α em um estrato (ou sub-estrato, ex. um polo)"""

    label: str
    codim: int
    hardy_c: float
    coords: tuple[float, ...] | None = None

    @property
    def alpha(self) -> float:
        return hardy_exponent(self.codim, self.hardy_c)

    @property
    def singular(self) -> bool:
        return self.hardy_c != 0.0

    @property
    def critical(self) -> bool:
        return self.singular and abs(self.hardy_c - hardy_threshold(self.codim)) < 1e-14

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "codim": self.codim,
            "alpha": self.alpha,
            "hardy_c": self.hardy_c,
            "singular": self.singular,
            "critical": self.critical,
            "coords": list(self.coords) if self.coords is not None else None,
        }


@dataclass(frozen=True)
class PotentialSpec:
    """
    Coeficientes a_ij, constante de elipticidade C₀, potencial V e expoentes previstos

    `coeff` recebe pontos cartesianos (N, n) e devolve (N, n, n).
    `potential` recebe (pontos, radial) e devolve V nos pontos.
    `radial_coeff` é o escalar usado na redução radial (média esférica do coeficiente radial).
    """

    name: str
    n: int
    coeff: CoeffFn
    ellipticity_C0: float
    potential: PotentialFn
    predicted: tuple[ExponentEntry, ...]
    lambda1_sign_hint: Lambda1Hint
    identity_coeff: bool = True
    radial_coeff: float | None = 1.0
    domain: StratifiedDomain | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def evaluate(self, dom: StratifiedDomain, x) -> np.ndarray:
        pts, radial = as_points(dom, x)
        return self.potential(pts, radial)

    def predicted_alphas(self) -> list[tuple[int, float]]:
        return [(e.codim, e.alpha) for e in self.predicted]

    def alphas_by_codim(self, dom: StratifiedDomain) -> dict[int, float]:
        """α_k por codimensão presente em dom (mínimo sobre sub-estratos)"""
        out: dict[int, float] = {}
        for s, e in match_entries(self, dom).items():
            k = dom.stratum(s).codim
            out[k] = e.alpha if k not in out else min(out[k], e.alpha)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "n": self.n,
            "ellipticity_C0": self.ellipticity_C0,
            "lambda1_sign_hint": self.lambda1_sign_hint.value,
            "predicted": [e.to_dict() for e in self.predicted],
            "params": self.params,
        }


def _entry_matches(e: ExponentEntry, s: Stratum) -> bool:
    if e.codim != s.codim:
        return False
    if s.geometry != StratumGeometry.POINT or e.coords is None:
        return True
    return bool(np.allclose(np.asarray(e.coords), np.asarray(s.coords), atol=1e-12))


def match_entries(spec: PotentialSpec, dom: StratifiedDomain) -> dict[str, ExponentEntry]:
    """
    Associa cada estrato de dom a uma entrada de expoente

    Estratos sem entrada recebem c = 0 (fronteira de Dirichlet com α₁ = 1, polos removíveis com α = 0).
    """
    out: dict[str, ExponentEntry] = {}
    for s in dom.strata:
        found = [e for e in spec.predicted if _entry_matches(e, s)]
        if found:
            singular = [e for e in found if e.singular]
            out[s.label] = singular[0] if singular else found[0]
        else:
            out[s.label] = ExponentEntry(s.label, s.codim, 0.0, s.coords)
    return out


def _identity(n: int) -> CoeffFn:
    def coeff(pts: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.eye(n), (pts.shape[0], n, n)).copy()

    return coeff


def zero_spec(n: int) -> PotentialSpec:
    """V = 0 com coeficientes identidade (ground state de Dirichlet, α₁ = 1)"""
    return PotentialSpec(
        name="zero",
        n=n,
        coeff=_identity(n),
        ellipticity_C0=1.0,
        potential=lambda pts, radial: np.zeros(pts.shape[0]),
        predicted=(ExponentEntry("fronteira", 1, 0.0),),
        lambda1_sign_hint=Lambda1Hint.POSITIVE,
    )


def example_I(n: int, poles: Sequence[tuple[Sequence[float], float]]) -> PotentialSpec:
    """V(x) = Σ c_i/|x − x_i|² com 0 ≤ c_i ≤ (n−2)²/4"""
    if n < 3:
        raise ParameterOutOfRange("exemplo I exige n ≥ 3", n=n)
    points = []
    entries = [ExponentEntry("fronteira", 1, 0.0)]
    for i, (p, c) in enumerate(poles):
        p = tuple(float(t) for t in p)
        if len(p) != n:
            raise ParameterOutOfRange("polo com dimensão errada", polo=i, n=n)
        c = float(c)
        if c < 0.0:
            raise ParameterOutOfRange("constante do polo deve ser ≥ 0", polo=i, c=c)
        if c > hardy_threshold(n) + 1e-14:
            raise HardyConstantExceeded(
                f"c_{i} = {c} excede (n−2)²/4 = {hardy_threshold(n)}", polo=i, c=c, n=n
            )
        if any(np.allclose(p, q) for q, _ in points):
            raise ParameterOutOfRange("polos repetidos", polo=i)
        points.append((p, c))
        entries.append(ExponentEntry(f"polo_{i}", n, c, p))
    if any(e.critical for e in entries):
        logger.warning("Constante de Hardy crítica no exemplo I; convergência discreta mais lenta", n=n)

    def potential(pts: np.ndarray, radial: bool) -> np.ndarray:
        out = np.zeros(pts.shape[0])
        if radial:
            if len(points) > 1 or (points and any(points[0][0])):
                raise ParameterOutOfRange("redução radial exige um único polo na origem")
            if points:
                out = points[0][1] / pts[:, 0] ** 2
            return out
        for p, c in points:
            out += c / np.sum((pts - np.asarray(p)[None, :]) ** 2, axis=1)
        return out

    return PotentialSpec(
        name="example_I",
        n=n,
        coeff=_identity(n),
        ellipticity_C0=1.0,
        potential=potential,
        predicted=tuple(entries),
        lambda1_sign_hint=Lambda1Hint.POSITIVE,
        params={"poles": [{"coords": list(p), "c": c} for p, c in points]},
    )


def _boundary_hardy(dom: StratifiedDomain, c: float = 0.25) -> tuple[PotentialFn, list[ExponentEntry]]:
    faces = dom.strata_of_codim(1)

    def potential(pts: np.ndarray, radial: bool) -> np.ndarray:
        d = np.min(np.vstack([stratum_distance(dom, s, pts, radial) for s in faces]), axis=0)
        return c / d ** 2

    return potential, [ExponentEntry(s.label, 1, c) for s in faces]


def boundary_hardy_spec(dom: StratifiedDomain) -> PotentialSpec:
    """(1/4)/dist² até os estratos de codimensão 1; demais estratos ignorados"""
    potential, entries = _boundary_hardy(dom)
    return PotentialSpec(
        name="example_III",
        n=dom.dimension,
        coeff=_identity(dom.dimension),
        ellipticity_C0=1.0,
        potential=potential,
        predicted=tuple(entries),
        lambda1_sign_hint=Lambda1Hint.FINITE_UNKNOWN,
        domain=dom,
    )


def example_III(dom: StratifiedDomain) -> PotentialSpec:
    """V(x) = (1/4)/dist²(x, ∂Ω); φ₁ ∼ dist^{1/2}"""
    if any(s.codim != 1 for s in dom.strata):
        raise ParameterOutOfRange("exemplo III exige apenas estratos de codimensão 1",
                                  estratos=[s.label for s in dom.strata])
    return boundary_hardy_spec(dom)


def example_IV(dom: StratifiedDomain) -> PotentialSpec:
    """Exemplo III na fronteira somado a um polo crítico (n−2)²/4 na origem"""
    points = [s for s in dom.strata if s.geometry == StratumGeometry.POINT]
    if len(points) != 1 or dom.dimension < 3:
        raise ParameterOutOfRange("exemplo IV exige domínio com um único polo e n ≥ 3", n=dom.dimension)
    n = dom.dimension
    boundary = boundary_hardy_spec(dom)
    pole = example_I(n, [(points[0].coords, hardy_threshold(n))])
    spec = sum_spec(boundary, pole)
    return replace(spec, name="example_IV")


def example_V(a: float, n: int) -> PotentialSpec:
    """
    a_ij = δ_ij + ½|x|^{2−a}(1−δ_ij), V = −a(n+a−2)/|x|² na bola unitária

    Expoentes previstos: α₁ = 1 (fronteira) e α_n = a (origem).
    """
    if n < 3:
        raise ParameterOutOfRange("exemplo V exige n ≥ 3", n=n)
    if not -(n - 2) / 2.0 <= a < 0.0:
        raise ParameterOutOfRange("a fora de [−(n−2)/2, 0)", a=a, n=n)
    c = -a * (n + a - 2)

    def coeff(pts: np.ndarray) -> np.ndarray:
        s = np.linalg.norm(pts, axis=1) ** (2.0 - a)
        off = np.ones((n, n)) - np.eye(n)
        return np.eye(n)[None, :, :] + 0.5 * s[:, None, None] * off[None, :, :]

    def potential(pts: np.ndarray, radial: bool) -> np.ndarray:
        rho = pts[:, 0] if radial else np.linalg.norm(pts, axis=1)
        return c / rho ** 2

    return PotentialSpec(
        name="example_V",
        n=n,
        coeff=coeff,
        ellipticity_C0=2.0 / (n + 2),
        potential=potential,
        predicted=(ExponentEntry("fronteira", 1, 0.0), ExponentEntry("origem", n, c, (0.0,) * n)),
        lambda1_sign_hint=Lambda1Hint.POSITIVE,
        identity_coeff=False,
        radial_coeff=1.0,
        params={"a": a},
    )


def example_II_catalog(n: int, radius: float = 2.0) -> PotentialSpec:
    """
    Bola B_R menos o círculo unitário E no plano (x1, x2): apenas catálogo, sem malha

    V = (1/4)/dist²(x,∂B_R) + ((n−3)²/4)/dist²(x,E); α₁ = 1/2 e α_{n−1} = (3−n)/2.
    """
    if n < 4:
        raise ParameterOutOfRange("exemplo II exige n ≥ 4", n=n)
    if radius <= 1.0:
        raise ParameterOutOfRange("raio deve exceder o círculo unitário", radius=radius)
    c_circle = hardy_threshold(n - 1)

    def potential(pts: np.ndarray, radial: bool) -> np.ndarray:
        if radial:
            raise ParameterOutOfRange("exemplo II não admite redução radial")
        d_b = radius - np.linalg.norm(pts, axis=1)
        planar = np.linalg.norm(pts[:, :2], axis=1)
        d_e = np.sqrt((planar - 1.0) ** 2 + np.sum(pts[:, 2:] ** 2, axis=1))
        return 0.25 / d_b ** 2 + c_circle / d_e ** 2

    return PotentialSpec(
        name="example_II",
        n=n,
        coeff=_identity(n),
        ellipticity_C0=1.0,
        potential=potential,
        predicted=(ExponentEntry("fronteira", 1, 0.25), ExponentEntry("circulo", n - 1, c_circle)),
        lambda1_sign_hint=Lambda1Hint.FINITE_UNKNOWN,
        radial_coeff=None,
        params={"radius": radius},
    )


def scale_potential(spec: PotentialSpec, factor: float) -> PotentialSpec:
    """V ↦ factor·V com os mesmos coeficientes; expoentes recalculados"""
    if factor < 0.0:
        raise ParameterOutOfRange("fator deve ser ≥ 0", factor=factor)
    base = spec.potential
    entries = tuple(replace(e, hardy_c=e.hardy_c * factor) for e in spec.predicted)
    for e in entries:
        hardy_exponent(e.codim, e.hardy_c)

    def potential(pts: np.ndarray, radial: bool) -> np.ndarray:
        return factor * base(pts, radial)

    return replace(spec, potential=potential, predicted=entries,
                   params={**spec.params, "scale": spec.params.get("scale", 1.0) * factor})


def _entry_stratum(e: ExponentEntry, dom: StratifiedDomain) -> Stratum | None:
    for s in dom.strata:
        if _entry_matches(e, s):
            return s
    return None


def _entry_separation(e: ExponentEntry, f: ExponentEntry, dom: StratifiedDomain | None) -> float:
    if e.coords is not None and f.coords is not None:
        return float(np.linalg.norm(np.subtract(e.coords, f.coords)))
    if dom is None:
        return 0.0 if e.codim == f.codim else math.inf
    s, t = _entry_stratum(e, dom), _entry_stratum(f, dom)
    if s is None or t is None:
        return math.inf
    if s.label == t.label:
        return 0.0
    if t.geometry == StratumGeometry.POINT:
        s, t = t, s
    if s.geometry == StratumGeometry.POINT:
        pts, radial = as_points(dom, np.asarray(s.coords)[None, :])
        return float(stratum_distance(dom, t, pts, radial)[0])
    if s.axis is not None and s.axis == t.axis:
        return abs(s.value - t.value)
    return 0.0


def sum_spec(p1: PotentialSpec, p2: PotentialSpec) -> PotentialSpec:
    """
    Soma de dois potenciais com conjuntos singulares disjuntos

    Entradas de expoente são unidas por estrato; no mesmo estrato prevalece a singular.
    """
    if p1.n != p2.n:
        raise ParameterOutOfRange("dimensões diferentes", n1=p1.n, n2=p2.n)
    if p2.name == "zero":
        return p1
    if p1.name == "zero":
        return p2
    if not (p1.identity_coeff and p2.identity_coeff) and p1.coeff is not p2.coeff:
        raise IncompatibleCoefficients("coeficientes a_ij diferentes", p1=p1.name, p2=p2.name)

    dom = p1.domain or p2.domain
    beta = dom.localization_beta if dom is not None else 0.0
    for e in p1.predicted:
        for f in p2.predicted:
            if not (e.singular and f.singular):
                continue
            sep = _entry_separation(e, f, dom)
            if sep < 2.0 * beta or sep == 0.0:
                raise OverlappingSingularities(
                    "conjuntos singulares se intersectam", estratos=[e.label, f.label], separacao=sep, beta=beta
                )

    merged: list[ExponentEntry] = list(p1.predicted)
    for f in p2.predicted:
        same = [i for i, e in enumerate(merged) if e.codim == f.codim and e.coords == f.coords]
        if not same:
            merged.append(f)
        elif f.singular and not merged[same[0]].singular:
            merged[same[0]] = f
    v1, v2 = p1.potential, p2.potential

    def potential(pts: np.ndarray, radial: bool) -> np.ndarray:
        return v1(pts, radial) + v2(pts, radial)

    logger.debug("Potenciais somados", p1=p1.name, p2=p2.name, entradas=len(merged))
    return PotentialSpec(
        name=f"sum({p1.name},{p2.name})",
        n=p1.n,
        coeff=p1.coeff,
        ellipticity_C0=min(p1.ellipticity_C0, p2.ellipticity_C0),
        potential=potential,
        predicted=tuple(merged),
        lambda1_sign_hint=Lambda1Hint.FINITE_UNKNOWN,
        identity_coeff=p1.identity_coeff and p2.identity_coeff,
        radial_coeff=p1.radial_coeff,
        domain=dom,
        params={"terms": [p1.name, p2.name]},
    )


@dataclass(frozen=True)
class EllipticityReport:
    min_eig: float
    max_eig: float
    C0_verified: bool

    def to_dict(self) -> dict[str, Any]:
        return {"min_eig": self.min_eig, "max_eig": self.max_eig, "C0_verified": self.C0_verified}


def check_ellipticity(spec: PotentialSpec, samples) -> EllipticityReport:
    """Extremos dos autovalores de a(x) nas amostras contra [C₀, C₀⁻¹]"""
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    mats = spec.coeff(pts)
    asym = np.max(np.abs(mats - np.swapaxes(mats, 1, 2)))
    if asym > _ASYMMETRY_TOL:
        raise AsymmetricCoefficient("matriz de coeficientes não simétrica", assimetria=float(asym))
    eig = np.linalg.eigvalsh(mats)
    lo, hi = float(eig.min()), float(eig.max())
    c0 = spec.ellipticity_C0
    ok = lo >= c0 - 1e-12 and hi <= 1.0 / c0 + 1e-12
    logger.debug("Elipticidade verificada", potencial=spec.name, min_eig=lo, max_eig=hi, ok=ok)
    return EllipticityReport(lo, hi, ok)


def catalog(n: int = 3) -> list[dict[str, Any]]:
    """Entradas do catálogo com expoentes previstos"""
    from hardyheat.core import geometry

    ball = geometry.radial_ball(1.0, ambient_n=max(n, 3))
    entries = [
        example_I(max(n, 3), [((0.0,) * max(n, 3), 0.25)]),
        example_III(geometry.interval(0.0, 1.0)),
        example_IV(ball),
        example_V(-0.5, max(n, 3)),
        example_II_catalog(max(n, 4)),
    ]
    return [e.to_dict() for e in entries]
