"""Stage orchestration: ingest -> embed -> select -> pseudo -> train -> eval.

Every stage reads its inputs, writes stable artifact names under the
workdir, and records a hash of everything it depended on. Re-running a stage
whose hash is unchanged is a no-op. Gold labels are only opened by the eval
stage.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import evaluate
from .classifier import ClassifierConfig, KimCNN, train_classifier
from .corpus import (CategorySpec, CorpusSchema, CorpusStore, parse_categories,
                     parse_corpus, parse_pattern_file, validate_categories)
from .embedding import EmbeddingModel, TrainConfig, train_joint, init_model
from .errors import ConfigError, PipelineError
from .motifs import MotifInstanceIndex, enumerate_instances
from .pseudo import (PseudoConfig, assemble_training_set, dump_jsonl, generate,
                     load_jsonl, retrieve)
from .selection import (IndicativeSet, SelectionConfig, dump_selections_tsv,
                        select_indicative)

log = logging.getLogger(__name__)

STAGES = ("ingest", "embed", "select", "pseudo", "train", "eval")
ABLATION_MODES = ("full", "no-higher-order", "no-specificity",
                  "retrieval-only-x", "retrieval-only-2x",
                  "generation-only-x", "generation-only-2x")


@dataclass
class PipelineConfig:
    corpus: str
    categories: str
    patterns: str
    workdir: str
    min_freq: int = 5
    seed: int = 0
    deterministic: bool = True
    ablation: str = "full"
    embedding: TrainConfig = field(default_factory=TrainConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    pseudo: PseudoConfig = field(default_factory=PseudoConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        if self.ablation not in ABLATION_MODES:
            raise ConfigError(f"unknown ablation mode {self.ablation!r}; "
                              f"choose from {', '.join(ABLATION_MODES)}")
        self.embedding.seed = self.seed
        self.embedding.deterministic = self.deterministic
        self.embedding.freeze_kappa = self.ablation == "no-specificity"
        self.classifier.seed = self.seed

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "PipelineConfig":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        raw.update(overrides or {})
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        try:
            kwargs = {
                "corpus": raw["corpus"],
                "categories": raw["categories"],
                "patterns": raw["patterns"],
                "workdir": raw["workdir"],
            }
        except KeyError as e:
            raise ConfigError(f"config missing required key {e.args[0]!r}") from None
        for key in ("min_freq", "seed", "deterministic", "ablation"):
            if key in raw:
                kwargs[key] = raw[key]
        kwargs["embedding"] = TrainConfig(**raw.get("embedding", {}))
        kwargs["selection"] = SelectionConfig(**raw.get("selection", {}))
        kwargs["pseudo"] = PseudoConfig(**raw.get("pseudo", {}))
        cls_raw = dict(raw.get("classifier", {}))
        if "filter_widths" in cls_raw:
            cls_raw["filter_widths"] = tuple(cls_raw["filter_widths"])
        kwargs["classifier"] = ClassifierConfig(**cls_raw)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classifier"]["filter_widths"] = list(self.classifier.filter_widths)
        return d

    def effective_pseudo_sizes(self) -> tuple[int, int]:
        x_r, x_g = self.pseudo.n_retrieved, self.pseudo.n_generated
        x = max(x_r, x_g)
        if self.ablation == "retrieval-only-x":
            return x, 0
        if self.ablation == "retrieval-only-2x":
            return 2 * x, 0
        if self.ablation == "generation-only-x":
            return 0, x
        if self.ablation == "generation-only-2x":
            return 0, 2 * x
        return x_r, x_g


class Pipeline:
    """Runs stages against a workdir, caching by config/input hash."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.workdir = Path(config.workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        self._store: CorpusStore | None = None
        self._categories: list[CategorySpec] | None = None
        self._index: MotifInstanceIndex | None = None

    # ------------------------------------------------------------ artifacts

    def path(self, name: str) -> Path:
        return self.workdir / name

    def _stage_hash(self, stage: str) -> str:
        cfg = self.config.to_dict()
        cfg.pop("workdir", None)
        h = hashlib.sha256(json.dumps(cfg, sort_keys=True).encode())
        for p in (self.config.corpus, self.config.categories, self.config.patterns):
            h.update(Path(p).read_bytes())
        h.update(stage.encode())
        return h.hexdigest()

    def _fresh(self, stage: str, artifacts: list[str]) -> bool:
        marker = self.path(f".{stage}.hash")
        if not marker.exists():
            return False
        if marker.read_text().strip() != self._stage_hash(stage):
            return False
        return all(self.path(a).exists() for a in artifacts)

    def _mark(self, stage: str) -> None:
        self.path(f".{stage}.hash").write_text(self._stage_hash(stage) + "\n")

    def _require(self, stage: str, artifact: str) -> Path:
        p = self.path(artifact)
        if not p.exists():
            raise PipelineError(
                f"missing artifact {artifact!r}; run the {stage!r} stage first")
        return p

    # --------------------------------------------------------------- inputs

    def load_inputs(self):
        if self._store is None:
            schema = CorpusSchema(metadata_types=[], min_freq=self.config.min_freq)
            # Metadata types are inferred from the pattern file's node types;
            # documents may only use declared types.
            probe_types = set()
            for line in Path(self.config.patterns).read_text().splitlines():
                line = line.split("#", 1)[0].strip()
                if line:
                    probe_types.update(t for t in line.split("-") if t != "Term")
            schema = CorpusSchema(metadata_types=sorted(probe_types),
                                  min_freq=self.config.min_freq)
            patterns = parse_pattern_file(self.config.patterns, schema)
            if self.config.ablation == "no-higher-order":
                patterns = [p for p in patterns if len(p.node_types) == 1]
            schema.candidate_patterns = patterns
            self._store = parse_corpus(self.config.corpus, schema)
            self._categories = parse_categories(self.config.categories)
            validate_categories(self._categories, self._store)
        return self._store, self._categories

    def build_index(self) -> MotifInstanceIndex:
        if self._index is None:
            store, _ = self.load_inputs()
            self._index = enumerate_instances(store, store.schema.candidate_patterns,
                                              self.config.min_freq)
        return self._index

    # --------------------------------------------------------------- stages

    def stage_ingest(self) -> None:
        if self._fresh("ingest", ["index.tsv"]):
            log.info("ingest: up to date")
            return
        index = self.build_index()
        index.dump_tsv(self.path("index.tsv"))
        self._mark("ingest")
        log.info("ingest: %d motif instances", len(index))

    def stage_embed(self) -> None:
        self._require("ingest", "index.tsv")
        if self._fresh("embed", ["model.bin"]):
            log.info("embed: up to date")
            return
        store, _ = self.load_inputs()
        index = self.build_index()
        model = train_joint(index, store, self.config.embedding)
        model.save(self.path("model.bin"))
        model.export_tsv(self.path("model.tsv"))
        self._mark("embed")

    def stage_select(self) -> None:
        self._require("embed", "model.bin")
        if self._fresh("select", ["selections.tsv", "selections.json"]):
            log.info("select: up to date")
            return
        store, categories = self.load_inputs()
        index = self.build_index()
        model = EmbeddingModel.load(self.path("model.bin"))
        apply_filter = self.config.ablation != "no-specificity"
        sets = [select_indicative(model, index, cat, self.config.selection,
                                  apply_filter=apply_filter)
                for cat in categories]
        dump_selections_tsv(sets, model, categories, self.path("selections.tsv"))
        payload = {s.label_id: [[iid, cos] for iid, cos in s.members] for s in sets}
        with open(self.path("selections.json"), "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True, indent=2)
            f.write("\n")
        self._mark("select")

    def _load_selections(self) -> list[IndicativeSet]:
        with open(self._require("select", "selections.json"), encoding="utf-8") as f:
            payload = json.load(f)
        return [IndicativeSet(label, [(iid, cos) for iid, cos in members])
                for label, members in sorted(payload.items())]

    def stage_pseudo(self) -> None:
        self._require("select", "selections.json")
        if self._fresh("pseudo", ["pseudo.jsonl"]):
            log.info("pseudo: up to date")
            return
        store, categories = self.load_inputs()
        index = self.build_index()
        model = EmbeddingModel.load(self.path("model.bin"))
        sets = self._load_selections()
        n_retrieved, n_generated = self.config.effective_pseudo_sizes()

        retrieved = retrieve(store, index, sets, n_retrieved) if n_retrieved else \
            {s.label_id: [] for s in sets}
        gen_cfg = PseudoConfig(
            n_retrieved=n_retrieved, n_generated=n_generated,
            generated_length=self.config.pseudo.generated_length,
            generated_length_cap=self.config.pseudo.generated_length_cap,
            generation_kappa=self.config.pseudo.generation_kappa,
            neighbor_pool=self.config.pseudo.neighbor_pool)
        gen_cfg.validate()
        generated = {}
        for k, cat in enumerate(sorted(categories, key=lambda c: c.label_id)):
            if n_generated:
                rng = np.random.default_rng([self.config.seed, 0x6E, k])
                generated[cat.label_id] = generate(model, cat, gen_cfg, rng,
                                                   corpus=store)
            else:
                generated[cat.label_id] = []
        pseudo_sets = assemble_training_set(retrieved, generated, store, index,
                                            categories)
        dump_jsonl(pseudo_sets, self.path("pseudo.jsonl"))
        self._mark("pseudo")

    def stage_train(self) -> None:
        self._require("pseudo", "pseudo.jsonl")
        if self._fresh("train", ["classifier.bin"]):
            log.info("train: up to date")
            return
        pseudo_sets = load_jsonl(self.path("pseudo.jsonl"))
        model = EmbeddingModel.load(self.path("model.bin"))
        rng = np.random.default_rng([self.config.seed, 0xC1])
        clf = train_classifier(pseudo_sets, model, self.config.classifier, rng)
        clf.save(self.path("classifier.bin"))
        self._mark("train")

    def stage_eval(self) -> dict:
        self._require("train", "classifier.bin")
        store, categories = self.load_inputs()
        index = self.build_index()
        clf = KimCNN.load(self.path("classifier.bin"))
        labels = [c.label_id for c in categories]

        from .classifier.features import build_input_sequence
        token_lists = [build_input_sequence(store[d], store.schema,
                                            clf.config.max_seq_length)
                       for d in store.doc_ids]
        probs = clf.predict_proba_tokens(token_lists)
        predictions = {d: clf.labels[int(np.argmax(probs[i]))]
                       for i, d in enumerate(store.doc_ids)}

        with open(self.path("predictions.tsv"), "w", encoding="utf-8") as f:
            f.write("doc_id\tpredicted\tprobability\n")
            for i, d in enumerate(store.doc_ids):
                f.write(f"{d}\t{predictions[d]}\t{probs[i].max():.6f}\n")

        golds = store.gold_labels()
        if not golds:
            raise PipelineError("eval stage requires gold labels in the corpus")

        retrieved: dict[str, list[tuple[str, int]]] = {l: [] for l in labels}
        for label, pset in load_jsonl(self.path("pseudo.jsonl")).items():
            for doc in pset.documents:
                if doc.provenance == "retrieved":
                    retrieved[label].append((doc.doc_id, doc.score))
        indicative = {s.label_id: s.member_ids for s in self._load_selections()}
        pattern_of = {iid: index[iid].pattern_id
                      for members in indicative.values() for iid in members}

        report = evaluate.build_report(predictions, golds, labels,
                                       retrieved=retrieved, indicative=indicative,
                                       pattern_of=pattern_of)
        report["ablation"] = self.config.ablation
        report["seed"] = self.config.seed
        evaluate.write_report_json(report, self.path("report.json"))
        self.path("report.md").write_text(evaluate.report_markdown(report))
        self.path("pseudo_curve.csv").write_text(evaluate.pseudo_curve_csv(report))
        self._mark("eval")
        return report

    def run(self, stage: str = "all"):
        if stage not in STAGES + ("all",):
            raise ConfigError(f"unknown stage {stage!r}")
        report = None
        for s in (STAGES if stage == "all" else (stage,)):
            fn = getattr(self, f"stage_{s}")
            result = fn()
            if s == "eval":
                report = result
        return report


def run_stage(stage: str, config: PipelineConfig):
    """Run one stage (or 'all'); returns the eval report when produced."""
    return Pipeline(config).run(stage)


def run_ablation_sweep(config: PipelineConfig) -> dict:
    """Run the retrieval/generation variants plus both model ablations.

    Each variant gets its own sub-workdir and the shared seed. Per-variant
    failures are recorded and the sweep continues.
    """
    modes = ["full", "retrieval-only-x", "retrieval-only-2x",
             "generation-only-x", "generation-only-2x",
             "no-higher-order", "no-specificity"]
    base = Path(config.workdir)
    results: dict[str, dict] = {}
    for mode in modes:
        sub = config.to_dict()
        sub["workdir"] = str(base / "sweep" / mode)
        sub["ablation"] = mode
        try:
            report = run_stage("all", PipelineConfig.from_dict(sub))
            results[mode] = {"micro_f1": report["micro_f1"],
                             "macro_f1": report["macro_f1"]}
        except Exception as e:  # noqa: BLE001 - sweep must survive one bad variant
            log.error("sweep variant %s failed: %s", mode, e)
            results[mode] = {"error": str(e)}

    lines = ["| Variant | Micro-F1 | Macro-F1 |", "|---|---|---|"]
    for mode in modes:
        r = results[mode]
        if "error" in r:
            lines.append(f"| {mode} | failed | failed |")
        else:
            lines.append(f"| {mode} | {r['micro_f1']:.3f} | {r['macro_f1']:.3f} |")
    table = "\n".join(lines) + "\n"
    (base / "sweep.md").write_text(table)
    with open(base / "sweep.json", "w", encoding="utf-8") as f:
        json.dump(results, f, sort_keys=True, indent=2)
        f.write("\n")
    return results
