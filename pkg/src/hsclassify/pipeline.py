"""End-to-end three-stage pipeline: heading, key sentences, subheading.

Training retrieves evidence from each case's gold heading's manual entry;
inference retrieves from the predicted heading's entry. The subheading head
ranges over the full subheading label space (no heading constraint) unless
the mask-to-heading-children mode is switched on.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .alignment import KeySentenceRetriever, RetrievalConfig
from .calibration import TemperatureScaler, fit_temperature
from .case_retrieval import CaseIndex, build_index, similar_cases, snippet_for
from .classifier import SoftmaxClassifier, TrainConfig, TrainReport, top_k, train
from .corpus import DecisionCase, LabelSpace, ManualEntry, build_label_space
from .encoder import PooledEncoder, encode_with_evidence
from .errors import BadK, DimensionMismatch, EmptyInput, MissingManualWarning, UntrainedModel
from .textproc import DEFAULT_STOPWORDS, IdfTable, WordVectorTable, compute_idf, tokenize

CHECKPOINT_FORMAT = 1


@dataclass(frozen=True)
class PipelineConfig:
    heading_train: TrainConfig = TrainConfig(seed=0)
    subheading_train: TrainConfig = TrainConfig(seed=1)
    retrieval: RetrievalConfig = RetrievalConfig()
    use_evidence: bool = True
    train_ablation: bool = False
    mask_to_heading: bool = False
    evidence_per_candidate: bool = False
    similar_cases_per_candidate: int = 3
    idf_documents: str = "cases+manual"

    def __post_init__(self):
        if self.idf_documents not in ("cases", "manual", "cases+manual"):
            raise ValueError(f"unknown idf_documents mode {self.idf_documents!r}")
        if self.similar_cases_per_candidate < 0:
            raise ValueError("similar_cases_per_candidate must be >= 0")


@dataclass
class SimilarCase:
    case_id: str
    similarity: float
    snippet: str


@dataclass
class HeadingCandidate:
    heading: str
    score: float
    key_sentences: list[str]
    manual_missing: bool = False


@dataclass
class SubheadingCandidate:
    subheading: str
    score: float
    similar_cases: list[SimilarCase]


@dataclass
class CandidateReport:
    """Decision-support output: ranked candidates with their evidence."""

    description: str
    heading_candidates: list[HeadingCandidate]
    subheading_candidates: list[SubheadingCandidate]

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "heading_candidates": [
                {
                    "heading": c.heading,
                    "score": c.score,
                    "key_sentences": list(c.key_sentences),
                    "manual_missing": c.manual_missing,
                }
                for c in self.heading_candidates
            ],
            "subheading_candidates": [
                {
                    "subheading": c.subheading,
                    "score": c.score,
                    "similar_cases": [
                        {"case_id": s.case_id, "similarity": s.similarity, "snippet": s.snippet}
                        for s in c.similar_cases
                    ],
                }
                for c in self.subheading_candidates
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateReport":
        return cls(
            description=data["description"],
            heading_candidates=[
                HeadingCandidate(
                    heading=c["heading"],
                    score=float(c["score"]),
                    key_sentences=list(c["key_sentences"]),
                    manual_missing=bool(c["manual_missing"]),
                )
                for c in data["heading_candidates"]
            ],
            subheading_candidates=[
                SubheadingCandidate(
                    subheading=c["subheading"],
                    score=float(c["score"]),
                    similar_cases=[
                        SimilarCase(s["case_id"], float(s["similarity"]), s["snippet"])
                        for s in c["similar_cases"]
                    ],
                )
                for c in data["subheading_candidates"]
            ],
        )

    def render_text(self) -> str:
        """Plain-text report; scores shown to 4 decimal places."""
        lines = [f"Input: {self.description}", "", "Heading candidates:"]
        for rank, cand in enumerate(self.heading_candidates, start=1):
            lines.append(f"  {rank}. {cand.heading}  score {cand.score:.4f}")
            if cand.manual_missing:
                lines.append("     (no manual entry available)")
            elif not cand.key_sentences:
                lines.append("     (no key sentences aligned)")
            else:
                lines.append("     Key sentences:")
                for number, sentence in enumerate(cand.key_sentences, start=1):
                    lines.append(f"       {number}. {sentence}")
        lines.append("")
        lines.append("Subheading candidates:")
        for rank, cand in enumerate(self.subheading_candidates, start=1):
            lines.append(f"  {rank}. {cand.subheading}  score {cand.score:.4f}")
            if cand.similar_cases:
                lines.append("     Similar cases:")
                for case in cand.similar_cases:
                    lines.append(
                        f"       - {case.case_id} (sim {case.similarity:.4f}): {case.snippet}"
                    )
            else:
                lines.append("     (no similar prior cases on record)")
        return "\n".join(lines) + "\n"


@dataclass
class FitReport:
    heading: TrainReport
    subheading: TrainReport
    ablation: TrainReport | None = None
    missing_manual_cases: int = 0


@dataclass
class PipelineModel:
    """A fitted pipeline: encoders, heads, retriever, scalers, case index."""

    encoder_stage1: PooledEncoder
    encoder_stage3: PooledEncoder
    heading_classifier: SoftmaxClassifier
    subheading_classifier: SoftmaxClassifier
    manuals: dict[str, ManualEntry]
    retriever: KeySentenceRetriever
    heading_scaler: TemperatureScaler
    subheading_scaler: TemperatureScaler
    label_space: LabelSpace
    case_index: CaseIndex
    config: PipelineConfig
    ablation_classifier: SoftmaxClassifier | None = None
    ablation_scaler: TemperatureScaler | None = None
    fit_report: FitReport | None = field(default=None, compare=False)

    def __post_init__(self):
        pairs = [
            (self.encoder_stage1, self.heading_classifier),
            (self.encoder_stage3, self.subheading_classifier),
        ]
        if self.ablation_classifier is not None:
            pairs.append((self.encoder_stage3, self.ablation_classifier))
        for encoder, classifier in pairs:
            if encoder.output_dimension != classifier.input_dimension:
                raise DimensionMismatch(
                    f"encoder dimension {encoder.output_dimension} does not match "
                    f"classifier input {classifier.input_dimension}"
                )
        if self.heading_classifier.labels != list(self.label_space.headings):
            raise ValueError("heading classifier is not bound to the heading label space")
        if self.subheading_classifier.labels != list(self.label_space.subheadings):
            raise ValueError("subheading classifier is not bound to the subheading label space")

    # -- stage helpers -----------------------------------------------------

    def heading_logits(self, description: str) -> np.ndarray:
        return self.heading_classifier.logits(self.encoder_stage1.encode(description))

    def heading_probabilities(self, description: str) -> np.ndarray:
        """Calibrated heading probabilities over the full heading space."""
        return self.heading_scaler.probabilities(self.heading_logits(description))

    def retrieve_for_heading(self, description: str, heading: str):
        """Key-sentence retrieval from one heading's manual; None if absent."""
        entry = self.manuals.get(heading)
        if entry is None:
            return None
        return self.retriever.retrieve(description, entry)

    def _stage3_vector(self, description: str, evidence: Sequence[str], with_evidence: bool):
        if with_evidence:
            return encode_with_evidence(self.encoder_stage3, description, list(evidence))
        return self.encoder_stage3.encode(description)

    def _evidence_for(self, description: str, heading: str) -> list[str]:
        result = self.retrieve_for_heading(description, heading)
        return result.sentence_texts() if result is not None else []

    def subheading_probabilities(self, description: str) -> np.ndarray:
        """Calibrated subheading probabilities along the inference path."""
        probs, _, _ = self._subheading_stage(description)
        return probs

    def ablation_subheading_probabilities(self, description: str) -> np.ndarray:
        if self.ablation_classifier is None or self.ablation_scaler is None:
            raise UntrainedModel("no ablation head was trained")
        top_heading = self.label_space.headings[int(np.argmax(self.heading_logits(description)))]
        evidence = self._evidence_for(description, top_heading)
        vector = self._stage3_vector(description, evidence, not self.config.use_evidence)
        return self.ablation_scaler.probabilities(self.ablation_classifier.logits(vector))

    def _subheading_stage(self, description: str):
        """Calibrated subheading probabilities, top-1 heading, its evidence."""
        heading_probs = self.heading_probabilities(description)
        ranked = top_k(heading_probs, min(len(self.label_space.headings), 3))
        top_heading = self.label_space.headings[ranked[0][0]]

        if self.config.evidence_per_candidate:
            # Mixture over heading candidates, weighted by calibrated score.
            mixed = np.zeros(len(self.label_space.subheadings))
            weight_sum = 0.0
            for index, weight in ranked:
                heading = self.label_space.headings[index]
                vector = self._stage3_vector(
                    description, self._evidence_for(description, heading), self.config.use_evidence
                )
                mixed += weight * self.subheading_scaler.probabilities(
                    self.subheading_classifier.logits(vector)
                )
                weight_sum += weight
            probs = mixed / weight_sum
            evidence = self._evidence_for(description, top_heading)
        else:
            evidence = self._evidence_for(description, top_heading)
            vector = self._stage3_vector(description, evidence, self.config.use_evidence)
            probs = self.subheading_scaler.probabilities(self.subheading_classifier.logits(vector))

        if self.config.mask_to_heading:
            mask = np.array(
                [s.startswith(top_heading) for s in self.label_space.subheadings], dtype=float
            )
            masked = probs * mask
            if masked.sum() > 0:
                probs = masked / masked.sum()
        return probs, top_heading, evidence

    # -- prediction --------------------------------------------------------

    def predict(self, description: str, k: int = 3) -> CandidateReport:
        """Rank headings and subheadings with evidence; k clamps to the label space."""
        if k < 1:
            raise BadK(f"k={k} must be >= 1")
        heading_probs = self.heading_probabilities(description)
        heading_ranked = top_k(heading_probs, min(k, len(self.label_space.headings)))

        heading_candidates = []
        for index, score in heading_ranked:
            heading = self.label_space.headings[index]
            result = self.retrieve_for_heading(description, heading)
            heading_candidates.append(
                HeadingCandidate(
                    heading=heading,
                    score=score,
                    key_sentences=result.sentence_texts() if result is not None else [],
                    manual_missing=result is None,
                )
            )

        sub_probs, top_heading, evidence = self._subheading_stage(description)
        sub_ranked = top_k(sub_probs, min(k, len(self.label_space.subheadings)))
        query_vector = self._stage3_vector(description, evidence, self.config.use_evidence)

        subheading_candidates = []
        for index, score in sub_ranked:
            subheading = self.label_space.subheadings[index]
            neighbours = similar_cases(
                self.case_index, query_vector, subheading, self.config.similar_cases_per_candidate
            )
            subheading_candidates.append(
                SubheadingCandidate(
                    subheading=subheading,
                    score=score,
                    similar_cases=[
                        SimilarCase(cid, sim, snippet_for(self.case_index, subheading, cid))
                        for cid, sim in neighbours
                    ],
                )
            )

        return CandidateReport(
            description=description,
            heading_candidates=heading_candidates,
            subheading_candidates=subheading_candidates,
        )


# -- fitting ----------------------------------------------------------------


def _idf_documents(
    cases: Sequence[DecisionCase], manuals: Mapping[str, ManualEntry], mode: str
) -> list[list[str]]:
    documents: list[list[str]] = []
    if mode in ("cases", "cases+manual"):
        documents.extend(tokenize(c.description) for c in cases)
    if mode in ("manual", "cases+manual"):
        for entry in manuals.values():
            documents.extend(tokenize(s) for s in entry.sentences)
    return documents


def _label_indices(cases: Sequence[DecisionCase], index: Mapping[str, int], level: str) -> list[int]:
    out = []
    for case in cases:
        label = case.label.heading if level == "heading" else case.label.subheading
        out.append(index.get(label, -1))
    return out


def _fit_scaler(logits: list[np.ndarray], labels: list[int]) -> TemperatureScaler:
    usable = [(z, y) for z, y in zip(logits, labels) if y >= 0]
    if not usable:
        warnings.warn("no usable validation cases; temperature defaults to 1.0", stacklevel=3)
        return TemperatureScaler(1.0)
    return fit_temperature([z for z, _ in usable], [y for _, y in usable])


def fit(
    train_cases: Sequence[DecisionCase],
    validation_cases: Sequence[DecisionCase],
    manuals: dict[str, ManualEntry],
    vectors: WordVectorTable,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    config: PipelineConfig = PipelineConfig(),
) -> PipelineModel:
    """Train both stages, fit per-stage temperatures, build the case index.

    Stage-3 training evidence comes from each case's gold heading's manual;
    cases whose gold heading has no manual entry train on the description
    alone (a MissingManualWarning is emitted per affected heading). Stage-3
    validation inputs follow the inference path: evidence retrieved from the
    heading the trained stage-1 model predicts.
    """
    if not train_cases:
        raise EmptyInput("no training cases")

    label_space = build_label_space(list(train_cases))
    idf = compute_idf(
        _idf_documents([*train_cases, *validation_cases], manuals, config.idf_documents)
    )
    encoder = PooledEncoder(vectors, idf, normalize=True)
    retriever = KeySentenceRetriever(vectors, idf, stopwords, config.retrieval)

    # Stage 1: heading from the description alone.
    x1_train = [encoder.encode(c.description) for c in train_cases]
    y1_train = _label_indices(train_cases, label_space.heading_index, "heading")
    x1_val = [encoder.encode(c.description) for c in validation_cases]
    y1_val = _label_indices(validation_cases, label_space.heading_index, "heading")
    heading_clf, heading_report = train(
        x1_train, y1_train, x1_val, y1_val, config.heading_train, label_space.headings
    )

    # Stage-3 training inputs: evidence from the gold heading's manual.
    evidence_by_case: dict[str, list[str]] = {}
    missing_headings: set[str] = set()
    for case in train_cases:
        entry = manuals.get(case.label.heading)
        if entry is None:
            missing_headings.add(case.label.heading)
            evidence_by_case[case.id] = []
        else:
            evidence_by_case[case.id] = retriever.retrieve(case.description, entry).sentence_texts()
    for heading in sorted(missing_headings):
        warnings.warn(
            f"no manual entry for gold heading {heading}; affected cases train on "
            "description alone",
            MissingManualWarning,
            stacklevel=2,
        )
    missing_count = sum(1 for c in train_cases if c.label.heading in missing_headings)

    def stage3_vector(case: DecisionCase, with_evidence: bool) -> np.ndarray:
        if with_evidence:
            return encode_with_evidence(encoder, case.description, evidence_by_case[case.id])
        return encoder.encode(case.description)

    # Stage-3 validation follows the inference path (predicted heading).
    def stage3_val_vector(case: DecisionCase, with_evidence: bool) -> np.ndarray:
        if not with_evidence:
            return encoder.encode(case.description)
        logits = heading_clf.logits(encoder.encode(case.description))
        predicted = label_space.headings[int(np.argmax(logits))]
        entry = manuals.get(predicted)
        sentences = (
            retriever.retrieve(case.description, entry).sentence_texts() if entry else []
        )
        return encode_with_evidence(encoder, case.description, sentences)

    y3_train = _label_indices(train_cases, label_space.subheading_index, "subheading")
    y3_val = _label_indices(validation_cases, label_space.subheading_index, "subheading")

    x3_train = [stage3_vector(c, config.use_evidence) for c in train_cases]
    x3_val = [stage3_val_vector(c, config.use_evidence) for c in validation_cases]
    subheading_clf, subheading_report = train(
        x3_train, y3_train, x3_val, y3_val, config.subheading_train, label_space.subheadings
    )

    ablation_clf = None
    ablation_scaler = None
    ablation_report = None
    if config.train_ablation:
        xa_train = [stage3_vector(c, not config.use_evidence) for c in train_cases]
        xa_val = [stage3_val_vector(c, not config.use_evidence) for c in validation_cases]
        ablation_clf, ablation_report = train(
            xa_train, y3_train, xa_val, y3_val, config.subheading_train, label_space.subheadings
        )
        ablation_scaler = _fit_scaler([ablation_clf.logits(v) for v in xa_val], y3_val)

    heading_scaler = _fit_scaler([heading_clf.logits(v) for v in x1_val], y1_val)
    subheading_scaler = _fit_scaler([subheading_clf.logits(v) for v in x3_val], y3_val)

    case_index = build_index(
        list(train_cases),
        encoder,
        evidence_by_case if config.use_evidence else {c.id: [] for c in train_cases},
    )

    return PipelineModel(
        encoder_stage1=encoder,
        encoder_stage3=encoder,
        heading_classifier=heading_clf,
        subheading_classifier=subheading_clf,
        manuals=dict(manuals),
        retriever=retriever,
        heading_scaler=heading_scaler,
        subheading_scaler=subheading_scaler,
        label_space=label_space,
        case_index=case_index,
        config=config,
        ablation_classifier=ablation_clf,
        ablation_scaler=ablation_scaler,
        fit_report=FitReport(
            heading=heading_report,
            subheading=subheading_report,
            ablation=ablation_report,
            missing_manual_cases=missing_count,
        ),
    )


def refit_temperatures(model: PipelineModel, validation_cases: Sequence[DecisionCase]) -> None:
    """Refit the per-stage temperature scalers on a validation split in place."""
    heading_logits = [model.heading_logits(c.description) for c in validation_cases]
    heading_labels = _label_indices(validation_cases, model.label_space.heading_index, "heading")
    model.heading_scaler = _fit_scaler(heading_logits, heading_labels)

    subheading_logits = []
    ablation_logits = []
    for case in validation_cases:
        top = model.label_space.headings[int(np.argmax(model.heading_logits(case.description)))]
        evidence = model._evidence_for(case.description, top)
        vector = model._stage3_vector(case.description, evidence, model.config.use_evidence)
        subheading_logits.append(model.subheading_classifier.logits(vector))
        if model.ablation_classifier is not None:
            other = model._stage3_vector(case.description, evidence, not model.config.use_evidence)
            ablation_logits.append(model.ablation_classifier.logits(other))
    subheading_labels = _label_indices(
        validation_cases, model.label_space.subheading_index, "subheading"
    )
    model.subheading_scaler = _fit_scaler(subheading_logits, subheading_labels)
    if model.ablation_classifier is not None:
        model.ablation_scaler = _fit_scaler(ablation_logits, subheading_labels)


# -- checkpointing -----------------------------------------------------------


def _config_to_dict(config: PipelineConfig) -> dict:
    return asdict(config)


def _config_from_dict(data: dict) -> PipelineConfig:
    return PipelineConfig(
        heading_train=TrainConfig(**data["heading_train"]),
        subheading_train=TrainConfig(**data["subheading_train"]),
        retrieval=RetrievalConfig(**data["retrieval"]),
        use_evidence=data["use_evidence"],
        train_ablation=data["train_ablation"],
        mask_to_heading=data["mask_to_heading"],
        evidence_per_candidate=data["evidence_per_candidate"],
        similar_cases_per_candidate=data["similar_cases_per_candidate"],
        idf_documents=data["idf_documents"],
    )


def _hash_json(data) -> str:
    return hashlib.sha256(
        json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, sort_keys=True, separators=(",", ":"))
        handle.write("\n")


def save_pipeline(model: PipelineModel, directory: str | Path) -> None:
    """Persist a fitted pipeline as a self-contained checkpoint directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    model.heading_classifier.save(directory / "heading_classifier.json", model.config.heading_train)
    model.subheading_classifier.save(
        directory / "subheading_classifier.json", model.config.subheading_train
    )
    files = ["heading_classifier.json", "subheading_classifier.json"]
    if model.ablation_classifier is not None:
        model.ablation_classifier.save(
            directory / "ablation_classifier.json", model.config.subheading_train
        )
        files.append("ablation_classifier.json")

    _write_json(directory / "case_index.json", model.case_index.to_dict())
    _write_json(directory / "idf.json", model.encoder_stage3.idf.to_dict())
    model.encoder_stage3.vectors.save(directory / "vectors.txt")
    with open(directory / "stopwords.txt", "w", encoding="utf-8") as handle:
        for word in sorted(model.retriever.stopwords):
            handle.write(word + "\n")
    with open(directory / "manual.jsonl", "w", encoding="utf-8") as handle:
        for heading, entry in model.manuals.items():
            record = {"heading": heading, "sentences": list(entry.sentences)}
            handle.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
    files.extend(["case_index.json", "idf.json", "vectors.txt", "stopwords.txt", "manual.jsonl"])

    config_dict = _config_to_dict(model.config)
    manifest = {
        "format_version": CHECKPOINT_FORMAT,
        "package_version": __version__,
        "config": config_dict,
        "config_hashes": {
            "pipeline": _hash_json(config_dict),
            "retrieval": _hash_json(config_dict["retrieval"]),
        },
        "heading_temperature": model.heading_scaler.temperature,
        "subheading_temperature": model.subheading_scaler.temperature,
        "ablation_temperature": (
            model.ablation_scaler.temperature if model.ablation_scaler is not None else None
        ),
        "label_space": {
            "headings": list(model.label_space.headings),
            "subheadings": list(model.label_space.subheadings),
        },
        "files": sorted(files),
    }
    _write_json(directory / "manifest.json", manifest)


def load_pipeline(directory: str | Path) -> PipelineModel:
    """Load a checkpoint directory written by save_pipeline."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise UntrainedModel(f"no pipeline checkpoint at {directory}")
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    if manifest.get("format_version") != CHECKPOINT_FORMAT:
        raise UntrainedModel(f"unsupported checkpoint format {manifest.get('format_version')}")
    for name in manifest.get("files", []):
        if not (directory / name).exists():
            raise UntrainedModel(f"checkpoint at {directory} is incomplete: missing {name}")

    config = _config_from_dict(manifest["config"])
    vectors = WordVectorTable.load(directory / "vectors.txt")
    with open(directory / "idf.json", encoding="utf-8") as handle:
        idf = IdfTable.from_dict(json.load(handle))
    with open(directory / "stopwords.txt", encoding="utf-8") as handle:
        stopwords = frozenset(w.strip() for w in handle if w.strip())

    from .corpus import load_manual  # local import to avoid cycle at module load

    manuals = load_manual(directory / "manual.jsonl")
    encoder = PooledEncoder(vectors, idf, normalize=True)
    retriever = KeySentenceRetriever(vectors, idf, stopwords, config.retrieval)

    heading_clf = SoftmaxClassifier.load(directory / "heading_classifier.json")
    subheading_clf = SoftmaxClassifier.load(directory / "subheading_classifier.json")
    ablation_path = directory / "ablation_classifier.json"
    ablation_clf = SoftmaxClassifier.load(ablation_path) if ablation_path.exists() else None

    with open(directory / "case_index.json", encoding="utf-8") as handle:
        case_index = CaseIndex.from_dict(json.load(handle))

    label_space = LabelSpace(
        headings=tuple(manifest["label_space"]["headings"]),
        subheadings=tuple(manifest["label_space"]["subheadings"]),
    )
    ablation_temp = manifest.get("ablation_temperature")
    return PipelineModel(
        encoder_stage1=encoder,
        encoder_stage3=encoder,
        heading_classifier=heading_clf,
        subheading_classifier=subheading_clf,
        manuals=manuals,
        retriever=retriever,
        heading_scaler=TemperatureScaler(manifest["heading_temperature"]),
        subheading_scaler=TemperatureScaler(manifest["subheading_temperature"]),
        label_space=label_space,
        case_index=case_index,
        config=config,
        ablation_classifier=ablation_clf,
        ablation_scaler=TemperatureScaler(ablation_temp) if ablation_temp is not None else None,
    )
