"""
CLI principal - run, compare e catalog
"""
import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import orjson
import structlog

from hardyheat.cli.deps import (
    get_builder,
    get_router,
    get_settings,
    get_tasks,
    get_veredito_processor,
    initialize_logging,
)
from hardyheat.core.errors import ConfigInvalid, HardyHeatError, TaskFailed
from hardyheat.core.potentials import catalog
from hardyheat.infra.reports import ReportStore, carregar_relatorio, comparar_relatorios, dumps
from hardyheat.runner.state import SCHEMA_VERSION, ExperimentConfig, ExperimentState, validar_config

logger = structlog.get_logger(__name__)


class ExperimentRunner:
    """Orquestrador: router → tarefas → veredito → pacote de relatório"""

    def __init__(self, config: ExperimentConfig, out_dir: Path, jobs: int = 1, dump_matrices: bool = False):
        self.config = config
        self.jobs = max(1, jobs)
        self.dump_matrices = dump_matrices
        self.builder = get_builder(config)
        self.router = get_router(self.builder)
        self.tasks = get_tasks(self.builder)
        self.veredito = get_veredito_processor()
        self.store = ReportStore(out_dir)
        logger.info("ExperimentRunner inicializado", experimento=config.name, jobs=self.jobs)

    def _executar_tarefa(self, state: ExperimentState, tarefa: str) -> str:
        logger.info("Executando tarefa", tarefa=tarefa)
        try:
            codigo = self.tasks[tarefa].processar(state)
        except TaskFailed:
            raise
        except HardyHeatError as e:
            logger.error("Erro na tarefa", tarefa=tarefa, codigo=e.codigo, error=str(e))
            raise TaskFailed(f"tarefa {tarefa}: {e.mensagem}", tarefa=tarefa, causa=e.to_dict()) from e
        except Exception as e:
            logger.error("Erro inesperado na tarefa", tarefa=tarefa, error=str(e), error_type=type(e).__name__)
            raise TaskFailed(f"tarefa {tarefa}: {e}", tarefa=tarefa, tipo=type(e).__name__) from e
        logger.info("Tarefa executada", tarefa=tarefa, codigo_resultado=codigo)
        return codigo

    def _executar_grupo(self, state: ExperimentState, grupo: List[str]) -> None:
        for tarefa in grupo:
            self._executar_tarefa(state, tarefa)

    def _montar_relatorio(self, state: ExperimentState) -> Dict:
        tarefas = {}
        for t in self.config.tasks:
            res = state.resultados[t]
            tarefas[t] = {
                "code": res.codigo,
                "result": res.resultado,
                "checks": [v.model_dump() for v in res.verificacoes],
            }
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.config.name,
            "seed": self.config.seed,
            "rng": "numpy.random.default_rng(seed)",
            "config": self.config.model_dump(mode="json", exclude={"out_dir"}),
            "tasks": tarefas,
            "summary": self.veredito.resumo(state),
            "exit_code": state.codigo_saida,
        }

    def executar(self) -> int:
        """
        Executa o experimento completo

        Returns:
            Código de saída (0 ok, 2 inconclusivo, 1 falha)
        """
        state = ExperimentState(config=self.config)
        plano = self.router.rotear(state)
        grupos = list(self.router.agrupar(plano).values())
        try:
            if self.jobs == 1 or len(grupos) == 1:
                for grupo in grupos:
                    self._executar_grupo(state, grupo)
            else:
                with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                    futuros = [pool.submit(self._executar_grupo, state, g) for g in grupos]
                    erros = [f.exception() for f in futuros]
                for e in erros:
                    if e is not None:
                        raise e
        except HardyHeatError as e:
            logger.error("Erro na execução do experimento", experimento=self.config.name, error=str(e))
            raise

        codigo = self.veredito.processar_veredito(state)

        if self.dump_matrices:
            for i, _ in enumerate(self.builder.niveis()):
                self.builder.forma(i).dump(self.store.dir_matrizes(), f"level{i}")
            logger.info("Matrizes exportadas", dir=str(self.store.dir_matrizes()))

        self.store.salvar_relatorio(self._montar_relatorio(state))
        self.store.salvar_csv("summary", self.veredito.resumo(state), ["task", "check", "value", "bound", "status"])
        for t in self.config.tasks:
            for nome, linhas in state.resultados[t].tabelas.items():
                if linhas:
                    self.store.salvar_csv(nome, linhas)
        self.store.salvar_meta({"out_dir": str(self.store.out_dir), "jobs": self.jobs})
        logger.info("Experimento concluído", experimento=self.config.name, codigo=codigo)
        return codigo


def carregar_config(path: Path) -> ExperimentConfig:
    try:
        data = orjson.loads(Path(path).read_bytes())
    except FileNotFoundError:
        raise ConfigInvalid(f"arquivo de configuração não encontrado: {path}", chave="<arquivo>")
    except orjson.JSONDecodeError as e:
        raise ConfigInvalid(f"JSON inválido: {e}", chave="<arquivo>")
    if not isinstance(data, dict):
        raise ConfigInvalid("a configuração deve ser um objeto JSON", chave="<raiz>")
    return validar_config(data)


def cmd_run(args) -> int:
    config = carregar_config(args.config)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = args.out
    if updates:
        config = config.model_copy(update=updates)
    if args.dry_run:
        logger.info("Configuração válida (dry-run)", experimento=config.name, tarefas=config.tasks)
        sys.stdout.write(f"configuração válida: {config.name} ({', '.join(config.tasks)})\n")
        return 0
    out_dir = Path(config.out_dir or Path(get_settings().out_dir) / config.name)
    runner = ExperimentRunner(config, out_dir, jobs=args.jobs, dump_matrices=args.dump_matrices)
    return runner.executar()


def cmd_compare(args) -> int:
    a = carregar_relatorio(args.report_a)
    b = carregar_relatorio(args.report_b)
    rtol = args.rtol
    if rtol is None:
        rtol = a.get("config", {}).get("tolerances", {}).get("compare_rtol", 1e-9)
    diff = comparar_relatorios(a, b, rtol)
    sys.stdout.write(dumps(diff).decode("utf-8"))
    return 0 if diff["within_tolerance"] else 1


def cmd_catalog(args) -> int:
    for entrada in catalog(args.n):
        sys.stdout.write(orjson.dumps(entrada).decode("utf-8") + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardyheat", description="Experimentos com potenciais de Hardy")
    parser.add_argument("--log-level", default=None, help="sobrepõe HARDYHEAT_LOG_LEVEL")
    sub = parser.add_subparsers(dest="comando", required=True)

    run = sub.add_parser("run", help="executa um experimento a partir de um JSON")
    run.add_argument("config", type=Path)
    run.add_argument("--dry-run", action="store_true", help="só valida o esquema")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--dump-matrices", action="store_true")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", type=str, default=None)
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="diferenças relativas entre dois relatórios")
    cmp_.add_argument("report_a", type=Path)
    cmp_.add_argument("report_b", type=Path)
    cmp_.add_argument("--rtol", type=float, default=None)
    cmp_.set_defaults(func=cmd_compare)

    cat = sub.add_parser("catalog", help="lista potenciais com expoentes previstos")
    cat.add_argument("--n", type=int, default=3)
    cat.set_defaults(func=cmd_catalog)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        initialize_logging(args.log_level)
        return args.func(args)
    except HardyHeatError as e:
        logger.error("Comando falhou", comando=args.comando, codigo=e.codigo, error=str(e))
        sys.stderr.write(f"erro: {e.mensagem}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
