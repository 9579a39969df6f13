"""
Persistência do pacote de relatório
report.json (orjson, chaves ordenadas), summary.csv, CSVs por tarefa e o sidecar report.meta.json
"""
import csv
import math
import platform
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import orjson
import structlog

from hardyheat.core.errors import SchemaMismatch

logger = structlog.get_logger(__name__)

OPCOES_JSON = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def normalizar(obj: Any) -> Any:
    """Chaves em str, tuplas em listas, enums pelo valor e floats não finitos em None"""
    if isinstance(obj, dict):
        return {str(k): normalizar(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalizar(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return normalizar(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj: Any) -> bytes:
    return orjson.dumps(normalizar(obj), option=OPCOES_JSON | orjson.OPT_APPEND_NEWLINE)


def _celula(v: Any) -> Any:
    if isinstance(v, (list, tuple, dict)):
        return orjson.dumps(normalizar(v)).decode("utf-8")
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


class ReportStore:
    """Gravação e leitura de pacotes de relatório em um diretório"""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        logger.info("ReportStore inicializado", out_dir=str(self.out_dir))

    def _garantir_dir(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def salvar_relatorio(self, report: Dict[str, Any]) -> Path:
        self._garantir_dir()
        path = self.out_dir / "report.json"
        data = dumps(report)
        path.write_bytes(data)
        logger.info("Relatório salvo", path=str(path), tamanho_bytes=len(data))
        return path

    def salvar_meta(self, extra: Optional[Dict[str, Any]] = None) -> Path:
        """Sidecar com horário e host; nunca entra em report.json"""
        self._garantir_dir()
        meta = {
            "written_at": datetime.now(timezone.utc).isoformat(),
            "host": platform.node(),
            "python": platform.python_version(),
            "numpy": np.__version__,
        }
        meta.update(extra or {})
        path = self.out_dir / "report.meta.json"
        path.write_bytes(dumps(meta))
        return path

    def salvar_csv(self, nome: str, linhas: List[Dict[str, Any]], colunas: Optional[List[str]] = None) -> Path:
        """CSV com ordem de colunas fixa (primeira aparição, ou `colunas`)"""
        self._garantir_dir()
        if colunas is None:
            colunas = []
            for linha in linhas:
                for k in linha:
                    if k not in colunas:
                        colunas.append(k)
        path = self.out_dir / f"{nome}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(colunas)
            for linha in linhas:
                writer.writerow([_celula(linha.get(c)) for c in colunas])
        logger.debug("CSV salvo", path=str(path), linhas=len(linhas))
        return path

    def dir_matrizes(self) -> Path:
        return self.out_dir / "matrices"


def carregar_relatorio(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    return orjson.loads(path.read_bytes())


def _escalares(obj: Any, prefixo: str = "") -> Iterable[Tuple[str, float]]:
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _escalares(obj[k], f"{prefixo}.{k}" if prefixo else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _escalares(v, f"{prefixo}[{i}]")
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        yield prefixo, float(obj)


def comparar_relatorios(a: Dict[str, Any], b: Dict[str, Any], rtol: float) -> Dict[str, Any]:
    """
    Diferenças relativas de todos os campos escalares comuns

    SchemaMismatch quando as versões de esquema diferem.
    """
    va, vb = a.get("schema_version"), b.get("schema_version")
    if va != vb:
        raise SchemaMismatch("versões de esquema diferentes", a=va, b=vb)
    ea, eb = dict(_escalares(a.get("tasks", {}))), dict(_escalares(b.get("tasks", {})))
    diffs = []
    for chave in sorted(set(ea) & set(eb)):
        x, y = ea[chave], eb[chave]
        rel = abs(x - y) / max(abs(x), abs(y)) if max(abs(x), abs(y)) > 0 else 0.0
        if rel > rtol:
            diffs.append({"field": chave, "a": x, "b": y, "rel_diff": rel})
    diff = {
        "schema_version": va,
        "same_experiment": a.get("experiment") == b.get("experiment"),
        "experiments": [a.get("experiment"), b.get("experiment")],
        "rtol": rtol,
        "only_in_a": sorted(set(ea) - set(eb)),
        "only_in_b": sorted(set(eb) - set(ea)),
        "differences": diffs,
    }
    diff["within_tolerance"] = not diffs and not diff["only_in_a"] and not diff["only_in_b"] and diff["same_experiment"]
    logger.info("Relatórios comparados", diferencas=len(diffs), mesmo_experimento=diff["same_experiment"])
    return diff
