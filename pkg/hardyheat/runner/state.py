"""
Configuração do experimento e estado da execução (pydantic v2)
"""
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from hardyheat.core.errors import ConfigInvalid

TaskName = Literal[
    "spectrum", "exponents", "heatkernel", "harnack", "sobolev",
    "logsobolev", "poincare", "moser", "volume", "appendix",
]

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DomainConfig(_Strict):
    """Domínio estratificado: forma, parâmetros e localização"""
    shape: Literal["interval", "interval_endpoints", "rectangle", "disc", "radial_ball"]
    a: float = 0.0
    b: float = 1.0
    widths: Tuple[float, float] = (1.0, 1.0)
    radius: float = 1.0
    ambient_n: int = 3
    puncture: bool = True
    punctures: List[List[float]] = Field(default_factory=list)
    beta: float = 0.25
    gamma: float = 1.5


class PoleConfig(_Strict):
    center: List[float]
    c: float


class PotentialConfig(_Strict):
    """Entrada do catálogo e seus parâmetros"""
    id: Literal["zero", "example_I", "example_III", "example_IV", "example_V", "sum"]
    poles: List[PoleConfig] = Field(default_factory=list)
    a: float = -0.5
    scale: float = 1.0
    terms: List["PotentialConfig"] = Field(default_factory=list)

    @model_validator(mode="after")
    def _termos_da_soma(self):
        if self.id == "sum" and len(self.terms) != 2:
            raise ValueError("sum exige exatamente dois termos")
        if self.id != "sum" and self.terms:
            raise ValueError("terms só vale para sum")
        return self


PotentialConfig.model_rebuild()


class MeshConfig(_Strict):
    h_min: float = 2.0 ** -16
    rho: float = 0.5
    layers: Optional[int] = None
    levels: int = 2
    grade: Literal["geometric", "none"] = "geometric"
    h_max: Optional[float] = None
    basis: Literal["auto", "ground_state", "plain"] = "auto"

    @field_validator("h_min")
    @classmethod
    def _h_min_positivo(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("h_min deve ser positivo")
        return v

    @field_validator("levels")
    @classmethod
    def _niveis(cls, v: int) -> int:
        if v < 1:
            raise ValueError("levels deve ser ≥ 1")
        return v


class Tolerances(_Strict):
    exponent: float = 0.025
    exponent_plain: float = 0.03
    eigen_rtol: float = 1e-3
    identity_defect: float = 5e-3
    sandwich_ratio_max: float = 100.0
    sandwich_growth: float = 0.10
    long_time: float = 0.02
    harnack_stability: float = 0.20
    harnack_boundary_ratio: float = 10.0
    kernel_oracle: float = 1e-4
    volume_spread: float = 50.0
    doubling_stability: float = 0.05
    slope_rtol: float = 0.05
    refined_hardy_slack: float = 1e-2
    poincare_spread: float = 10.0
    compare_rtol: float = 1e-9


class SpectrumParams(_Strict):
    oracle: Optional[Literal["zero_interval", "example_III_interval", "example_I_ball"]] = None
    identity_samples: int = 0


class ExponentsParams(_Strict):
    window: Optional[Tuple[float, float]] = None
    expected: Dict[str, float] = Field(default_factory=dict)
    plain_check: bool = False
    plain_h_min: float = 2.0 ** -32


class HeatKernelParams(_Strict):
    times: List[float] = Field(default_factory=lambda: [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1])
    long_times: List[float] = Field(default_factory=lambda: [0.2, 0.4, 0.8, 1.6, 3.2])
    pairs: int = 12
    oracle: Optional[Literal["sine_series"]] = None
    oracle_time: float = 0.05


class HarnackParams(_Strict):
    centers: List[List[float]] = Field(default_factory=list)
    radii: List[float] = Field(default_factory=lambda: [0.1])
    samples: int = 10


class SobolevRun(_Strict):
    kind: Literal["sobolev", "log_corrected", "critical_hardy", "critical_hardy_control", "codim_block"] = "sobolev"
    q: float = 6.0
    lam: float = 1.0
    levels: Optional[List[float]] = None
    expect: Optional[Literal["BoundedBelow", "DegeneratesToZero", "Inconclusive"]] = None
    k: int = 1
    alpha_k: float = 0.5
    delta: float = 0.2
    ambient_n: Optional[int] = None


class SobolevParams(_Strict):
    runs: List[SobolevRun] = Field(default_factory=lambda: [SobolevRun()])


class LogSobolevParams(_Strict):
    eps: List[float] = Field(default_factory=lambda: [1e-3, 2.68e-3, 7.2e-3, 1.93e-2, 5.18e-2, 0.139, 0.373, 1.0])
    samples: int = 20
    slope_h_min: float = 2.0 ** -22
    slope_eps: List[float] = Field(default_factory=lambda: [1e-9, 3.16e-9, 1e-8, 3.16e-8, 1e-7, 3.16e-7, 1e-6,
                                                            3.16e-6, 1e-5])


class LocalParams(_Strict):
    centers: List[List[float]] = Field(default_factory=list)
    radii: List[float] = Field(default_factory=lambda: [0.02, 0.05, 0.1])
    alphas: Optional[Dict[int, float]] = None
    nu: Optional[float] = None
    f_samples: int = 8
    h_min: float = 1e-6


class VolumeParams(_Strict):
    points: int = 10
    radii: int = 10
    alphas: Optional[Dict[int, float]] = None


class AppendixParams(_Strict):
    deltas: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    h_min: float = 2.0 ** -20
    refined_delta: float = 0.2


class TaskParams(_Strict):
    spectrum: SpectrumParams = Field(default_factory=SpectrumParams)
    exponents: ExponentsParams = Field(default_factory=ExponentsParams)
    heatkernel: HeatKernelParams = Field(default_factory=HeatKernelParams)
    harnack: HarnackParams = Field(default_factory=HarnackParams)
    sobolev: SobolevParams = Field(default_factory=SobolevParams)
    logsobolev: LogSobolevParams = Field(default_factory=LogSobolevParams)
    poincare: LocalParams = Field(default_factory=LocalParams)
    moser: LocalParams = Field(default_factory=LocalParams)
    volume: VolumeParams = Field(default_factory=VolumeParams)
    appendix: AppendixParams = Field(default_factory=AppendixParams)


class ExperimentConfig(_Strict):
    """Configuração completa; validada antes de qualquer cálculo"""
    name: str
    domain: DomainConfig
    potential: PotentialConfig
    mesh: MeshConfig = Field(default_factory=MeshConfig)
    tasks: List[TaskName]
    params: TaskParams = Field(default_factory=TaskParams)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    out_dir: Optional[str] = None
    seed: int = 0

    @model_validator(mode="after")
    def _tarefas_unicas(self):
        if not self.tasks:
            raise ValueError("lista de tarefas vazia")
        if len(set(self.tasks)) != len(self.tasks):
            raise ValueError("tarefas repetidas")
        return self


def validar_config(data: Dict[str, Any]) -> ExperimentConfig:
    """Valida o JSON da configuração; ConfigInvalid nomeia a chave ofensora"""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        chave = ".".join(str(p) for p in first["loc"]) or "<raiz>"
        raise ConfigInvalid(f"configuração inválida em '{chave}': {first['msg']}", chave=chave,
                            erros=len(e.errors()))


class Verificacao(BaseModel):
    """Uma verificação declarada por uma tarefa"""
    nome: str
    valor: Optional[float] = None
    limite: Optional[str] = None
    status: Literal["ok", "falhou", "inconclusivo"]

    @classmethod
    def de(cls, nome: str, valor: Optional[float], ok: Optional[bool], limite: Optional[str] = None) -> "Verificacao":
        """ok=None marca a verificação como inconclusiva"""
        status = "inconclusivo" if ok is None else ("ok" if ok else "falhou")
        return cls(nome=nome, valor=None if valor is None else float(valor), limite=limite, status=status)


class ResultadoTarefa(BaseModel):
    codigo: str
    resultado: Dict[str, Any] = Field(default_factory=dict)
    verificacoes: List[Verificacao] = Field(default_factory=list)
    tabelas: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict)


class ExperimentState(BaseModel):
    """Estado da execução; resultados chaveados por tarefa"""
    config: ExperimentConfig
    resultados: Dict[str, ResultadoTarefa] = Field(default_factory=dict)
    tarefas_executadas: List[str] = Field(default_factory=list)
    codigo_saida: Optional[int] = None
    meta: Dict[str, Any] = Field(default_factory=dict)

    def __str__(self) -> str:
        return f"ExperimentState(nome={self.config.name}, tarefas={len(self.tarefas_executadas)})"

    def registrar(self, tarefa: str, resultado: ResultadoTarefa) -> None:
        self.resultados[tarefa] = resultado
        if tarefa not in self.tarefas_executadas:
            self.tarefas_executadas.append(tarefa)

    def verificacoes(self) -> List[Tuple[str, Verificacao]]:
        """Verificações na ordem das tarefas da configuração"""
        out = []
        for tarefa in self.config.tasks:
            res = self.resultados.get(tarefa)
            if res is not None:
                out.extend((tarefa, v) for v in res.verificacoes)
        return out

    def tem_inconclusivo(self) -> bool:
        return any(v.status == "inconclusivo" for _, v in self.verificacoes())

    def tem_falha(self) -> bool:
        return any(v.status == "falhou" for _, v in self.verificacoes())
