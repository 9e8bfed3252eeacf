"""Run configuration: one JSON document, every field mirrored by a CLI flag.

Precedence is defaults < config file < flags.  The resolved config is
echoed into every report so a run can be reproduced from its output alone.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Dataset, load_dataset
from .ensemble import EnsembleConfig
from .errors import SchemaError
from .pipeline import Pipeline
from .reader import HttpReader, LexicalReader, Reader
from .selector import BudgetConfig
from .similarity import (
    RemoteEmbeddingProvider,
    SimilarityMember,
    SimilarityModelConfig,
)

_METRIC_SPEC = re.compile(
    r"^(?P<metric>cosine|levenshtein|qgram)(?P<q>\d+)?(@(?P<provider>[\w.-]+))?(:(?P<weight>[\d.]+))?$"
)


def parse_metric_spec(spec: str) -> SimilarityMember:
    """Parse the compact member syntax metric[N][@provider][:weight],
    e.g. 'cosine@remote:2' or 'qgram3'."""
    m = _METRIC_SPEC.match(spec.strip())
    if not m:
        raise SchemaError(f"bad similarity member spec {spec!r}")
    metric = m.group("metric")
    q = m.group("q")
    if q is not None and metric != "qgram":
        raise SchemaError(f"only qgram takes a gram size, got {spec!r}")
    return SimilarityMember(
        metric=metric,
        provider=m.group("provider"),
        weight=float(m.group("weight") or 1.0),
        q=int(q) if q else 2,
    )


@dataclass
class RunConfig:
    items_path: str | None = None
    documents_path: str | None = None
    data_dir: str | None = None
    format: str = "normalized_jsonl"
    split: str | None = None
    k: int = 5
    max_tokens: int = 130
    metrics: list[dict] = field(default_factory=list)  # empty -> default members
    query_mode: str = "concat_all"
    readers: list[str] = field(default_factory=lambda: ["lexical"])
    ensemble_rule: str = "majority"
    ensemble_weights: list[float] | None = None
    temperature: float = 1.0
    embed_url: str | None = None
    seed: int = 0  # reserved; the built-in pipeline is deterministic

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config file {path}: invalid JSON ({exc})") from exc
        cfg = cls()
        data = raw.get("data", {})
        cfg.items_path = data.get("items", cfg.items_path)
        cfg.documents_path = data.get("documents", cfg.documents_path)
        cfg.data_dir = data.get("dir", cfg.data_dir)
        cfg.format = data.get("format", cfg.format)
        cfg.split = data.get("split", cfg.split)
        budget = raw.get("budget", {})
        cfg.k = int(budget.get("k", cfg.k))
        cfg.max_tokens = int(budget.get("max_tokens", cfg.max_tokens))
        sim = raw.get("similarity", {})
        cfg.metrics = list(sim.get("members", []))
        cfg.query_mode = raw.get("query_mode", cfg.query_mode)
        cfg.readers = list(raw.get("readers", cfg.readers))
        ens = raw.get("ensemble", {})
        cfg.ensemble_rule = ens.get("rule", cfg.ensemble_rule)
        if "weights" in ens:
            cfg.ensemble_weights = [float(w) for w in ens["weights"]]
        cfg.temperature = float(raw.get("temperature", cfg.temperature))
        cfg.embed_url = raw.get("embed_url", cfg.embed_url)
        cfg.seed = int(raw.get("seed", cfg.seed))
        return cfg

    # -- resolution ---------------------------------------------------------

    def resolve_data_paths(self) -> tuple[Path, Path]:
        items, docs = self.items_path, self.documents_path
        if self.data_dir is not None:
            base = Path(self.data_dir)
            if self.format == "normalized_jsonl":
                items = items or str(base / "items.jsonl")
                docs = docs or str(base / "documents.jsonl")
            else:
                items = items or str(base / "qa.json")
                if docs is None:
                    for name in ("plot", "plots"):
                        if (base / name).is_dir():
                            docs = str(base / name)
                            break
                    docs = docs or str(base / "plot")
        if items is None or docs is None:
            raise SchemaError(
                "no dataset given: pass --data DIR or both --items and --documents"
            )
        return Path(items), Path(docs)

    def load(self) -> Dataset:
        items, docs = self.resolve_data_paths()
        return load_dataset(items, docs, format=self.format, split=self.split)

    def similarity_config(self) -> SimilarityModelConfig:
        if not self.metrics:
            return SimilarityModelConfig.default()
        members = []
        for entry in self.metrics:
            if isinstance(entry, str):
                members.append(parse_metric_spec(entry))
            else:
                members.append(
                    SimilarityMember(
                        metric=entry["metric"],
                        provider=entry.get("provider"),
                        weight=float(entry.get("weight", 1.0)),
                        q=int(entry.get("q", 2)),
                    )
                )
        return SimilarityModelConfig(members=tuple(members))

    def build_readers(self) -> list[Reader]:
        readers: list[Reader] = []
        for spec in self.readers:
            if spec == "lexical":
                readers.append(LexicalReader())
            elif spec.startswith("http:") or spec.startswith("https:"):
                readers.append(HttpReader(base_url=spec))
            else:
                raise SchemaError(
                    f"unknown reader {spec!r} (expected 'lexical' or an http URL)"
                )
        return readers

    def build_pipeline(self, dataset: Dataset) -> Pipeline:
        similarity = self.similarity_config()
        providers = {}
        needs_remote = any(m.provider == "remote" for m in similarity.members)
        if needs_remote:
            providers["remote"] = RemoteEmbeddingProvider(base_url=self.embed_url)
        readers = self.build_readers()
        ensemble = None
        if self.ensemble_weights is not None or self.ensemble_rule != "majority":
            ids = tuple(r.reader_id for r in readers)
            weights = tuple(self.ensemble_weights or [1.0] * len(ids))
            ensemble = EnsembleConfig(members=ids, weights=weights, rule=self.ensemble_rule)
        return Pipeline(
            dataset=dataset,
            budget=BudgetConfig(k=self.k, max_tokens=self.max_tokens),
            similarity=similarity,
            readers=readers,
            ensemble=ensemble,
            query_mode=self.query_mode,
            providers=providers or None,
            temperature=self.temperature,
        )

    def echo_dict(self) -> dict:
        """Effective config as embedded in reports.  Execution details that
        cannot change results (jobs, output paths) are deliberately absent."""
        sim = self.similarity_config()
        return {
            "data": {
                "items": self.items_path,
                "documents": self.documents_path,
                "dir": self.data_dir,
                "format": self.format,
                "split": self.split,
            },
            "budget": {"k": self.k, "max_tokens": self.max_tokens},
            "similarity": {
                "normalization": sim.normalization,
                "combination": sim.combination,
                "members": [
                    {
                        "metric": m.metric,
                        "provider": m.provider,
                        "weight": m.weight,
                        "q": m.q,
                    }
                    for m in sim.members
                ],
            },
            "query_mode": self.query_mode,
            "readers": list(self.readers),
            "ensemble": {
                "rule": self.ensemble_rule,
                "weights": self.ensemble_weights,
            },
            "temperature": self.temperature,
            "embed_url": self.embed_url,
            "seed": self.seed,
        }
