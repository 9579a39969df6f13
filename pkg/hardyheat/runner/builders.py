"""
Construção de domínio, potencial, malhas e formas a partir da configuração

Formas e ground states são construídos uma vez por nível e compartilhados entre
tarefas; cada chave do cache tem seu próprio lock, de modo que níveis distintos
são montados em paralelo com --jobs.
"""
import threading
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog

from hardyheat.core import geometry, potentials
from hardyheat.core.discretize import DiscreteForm, assemble, build_mesh
from hardyheat.core.geometry import StratifiedDomain
from hardyheat.core.potentials import PotentialSpec
from hardyheat.core.spectral import GroundState, solve_ground_state
from hardyheat.runner.state import DomainConfig, ExperimentConfig, PotentialConfig

logger = structlog.get_logger(__name__)


def construir_dominio(cfg: DomainConfig) -> StratifiedDomain:
    if cfg.shape == "interval":
        return geometry.interval(cfg.a, cfg.b, cfg.beta, cfg.gamma)
    if cfg.shape == "interval_endpoints":
        return geometry.interval_endpoints(cfg.a, cfg.b, cfg.beta, cfg.gamma)
    if cfg.shape == "rectangle":
        return geometry.rectangle(cfg.widths, cfg.beta, cfg.gamma, cfg.punctures)
    if cfg.shape == "disc":
        return geometry.disc(cfg.radius, cfg.puncture, cfg.beta, cfg.gamma)
    return geometry.radial_ball(cfg.radius, cfg.ambient_n, cfg.puncture, cfg.beta, cfg.gamma)


def construir_potencial(cfg: PotentialConfig, dom: StratifiedDomain, termo: bool = False) -> PotentialSpec:
    """
    Potencial da configuração; `sum` combina dois termos via sum_spec

    Dentro de uma soma, example_III contribui só a parte de fronteira: os polos
    do domínio ficam a cargo do outro termo.
    """
    n = dom.dimension
    if cfg.id == "sum":
        p1, p2 = (construir_potencial(t, dom, termo=True) for t in cfg.terms)
        spec = potentials.sum_spec(p1, p2)
    elif cfg.id == "zero":
        spec = potentials.zero_spec(n)
    elif cfg.id == "example_I":
        spec = potentials.example_I(n, [(p.center, p.c) for p in cfg.poles])
    elif cfg.id == "example_III":
        spec = potentials.boundary_hardy_spec(dom) if termo else potentials.example_III(dom)
    elif cfg.id == "example_IV":
        spec = potentials.example_IV(dom)
    else:
        spec = potentials.example_V(cfg.a, n)
    if cfg.scale != 1.0:
        spec = potentials.scale_potential(spec, cfg.scale)
    return spec


class ExperimentBuilder:
    """Cache de domínio, potencial e formas por nível de malha"""

    def __init__(self, config: ExperimentConfig, node_cap: int, dense_limit: int):
        self.config = config
        self.node_cap = node_cap
        self.dense_limit = dense_limit
        self.dominio = construir_dominio(config.domain)
        self.potencial = construir_potencial(config.potential, self.dominio)
        self._formas: Dict[Tuple[int, str], DiscreteForm] = {}
        self._ground_states: Dict[Tuple[int, str], GroundState] = {}
        self._lock = threading.Lock()
        self._locks_por_chave: Dict[Tuple, threading.Lock] = {}
        logger.info("ExperimentBuilder inicializado", dominio=self.dominio.shape.kind.value,
                    potencial=self.potencial.name, niveis=config.mesh.levels)

    def _lock_da_chave(self, chave: Tuple) -> threading.Lock:
        with self._lock:
            return self._locks_por_chave.setdefault(chave, threading.Lock())

    def niveis(self) -> List[float]:
        """h_min por nível, do mais grosso ao mais fino (razão 2)"""
        m = self.config.mesh
        return [m.h_min * 2.0 ** (m.levels - 1 - i) for i in range(m.levels)]

    def alphas_por_estrato(self) -> Dict[str, float]:
        entries = potentials.match_entries(self.potencial, self.dominio)
        return {label: e.alpha for label, e in entries.items()}

    def alphas_por_codim(self) -> Dict[int, float]:
        return self.potencial.alphas_by_codim(self.dominio)

    def forma(self, nivel: int = -1, basis: Optional[str] = None, h_min: Optional[float] = None) -> DiscreteForm:
        m = self.config.mesh
        basis = basis or m.basis
        h = h_min if h_min is not None else self.niveis()[nivel]
        chave = (int(round(np.log2(h) * 1e6)), basis)
        with self._lock_da_chave(("forma",) + chave):
            if chave not in self._formas:
                mesh = build_mesh(self.dominio, self.potencial, h, rho=m.rho, layers=m.layers,
                                  h_max=m.h_max, grade=m.grade, node_cap=self.node_cap)
                self._formas[chave] = assemble(mesh, self.potencial, basis=basis)
            return self._formas[chave]

    def ground_state(self, nivel: int = -1, basis: Optional[str] = None,
                     h_min: Optional[float] = None) -> GroundState:
        form = self.forma(nivel, basis, h_min)
        chave = (id(form), form.basis)
        with self._lock_da_chave(("gs",) + chave):
            if chave not in self._ground_states:
                self._ground_states[chave] = solve_ground_state(form, dense_limit=self.dense_limit)
            return self._ground_states[chave]
