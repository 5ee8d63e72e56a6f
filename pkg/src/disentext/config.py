"""Flat ``key = value`` run configuration.

Every key has a default. Unknown keys are rejected so a typo never passes
silently. Lines starting with ``#`` are comments. Relative paths are
resolved against the directory of the config file.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .objectives import HyperParams


class ConfigError(ValueError):
    pass


def _doc(text, **kw):
    return field(metadata={"doc": text}, **kw)


@dataclass
class TrainConfig:
    # data
    corpus: str = _doc("training corpus (label<TAB>text per line)", default="")
    labels: str = _doc("optional label file; if set, `corpus` holds plain sentences", default="")
    val_corpus: str = _doc("optional validation corpus; else `val_fraction` is held out", default="")
    val_fraction: float = _doc("fraction of the corpus held out for val_recon", default=0.1)
    stopwords: str = _doc("stopword list (bundled list if empty)", default="")
    positive_lexicon: str = _doc("positive sentiment words (bundled if empty)", default="")
    negative_lexicon: str = _doc("negative sentiment words (bundled if empty)", default="")
    bow_mode: str = _doc(
        "full | no-sentiment | no-stopwords | no-stopwords-no-sentiment",
        default="no-stopwords-no-sentiment",
    )
    min_count: int = _doc("minimum token frequency for the vocabulary", default=1)
    max_len: int = _doc("maximum sentence length in tokens, end marker included", default=30)
    # model
    mode: str = _doc("dae | vae", default="dae")
    embed_dim: int = _doc("word embedding size", default=128)
    hidden_dim: int = _doc("GRU hidden size (encoder and decoder)", default=256)
    style_dim: int = _doc("style vector size", default=8)
    content_dim: int = _doc("content vector size", default=128)
    # objective
    lambda_mul_s: float = _doc("style multi-task weight", default=10.0)
    lambda_adv_s: float = _doc("style adversarial entropy weight", default=1.0)
    lambda_mul_c: float = _doc("content (BoW) multi-task weight", default=3.0)
    lambda_adv_c: float = _doc("content adversarial entropy weight", default=0.03)
    lambda_kl_s: float = _doc("VAE KL weight on the style posterior", default=0.03)
    lambda_kl_c: float = _doc("VAE KL weight on the content posterior", default=0.03)
    anneal_k: float = _doc("KL annealing sigmoid steepness", default=0.0025)
    anneal_t0: float = _doc("KL annealing sigmoid midpoint (global step)", default=2500.0)
    # optimisation
    lr_autoencoder: float = _doc("Adam learning rate for the autoencoder step", default=1e-3)
    lr_discriminator: float = _doc("RMSProp learning rate for the adversaries", default=1e-3)
    adam_beta1: float = _doc("Adam beta1", default=0.9)
    adam_beta2: float = _doc("Adam beta2", default=0.999)
    adam_eps: float = _doc("Adam epsilon", default=1e-8)
    rmsprop_decay: float = _doc("RMSProp running-average decay", default=0.9)
    rmsprop_eps: float = _doc("RMSProp epsilon", default=1e-8)
    batch_size: int = _doc("mini-batch size", default=64)
    epochs: int = _doc("training epochs", default=20)
    dis_steps: int = _doc("adversary updates per mini-batch", default=1)
    clip_norm: float = _doc("global gradient-norm clip on the autoencoder step (0 = off)", default=5.0)
    embedding_init: str = _doc("random | skipgram", default="random")
    skipgram_epochs: int = _doc("skip-gram pretraining epochs", default=5)
    skipgram_window: int = _doc("skip-gram context window", default=2)
    skipgram_negatives: int = _doc("skip-gram negative samples per pair", default=5)
    dtype: str = _doc("float64 | float32", default="float64")
    seed: int = _doc("master random seed", default=0)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in ("dae", "vae"):
            raise ConfigError(f"mode must be dae or vae, got {self.mode!r}")
        if self.embedding_init not in ("random", "skipgram"):
            raise ConfigError(f"embedding_init must be random or skipgram")
        if self.dtype not in ("float64", "float32"):
            raise ConfigError("dtype must be float64 or float32")
        for name in ("batch_size", "epochs", "min_count", "max_len", "dis_steps"):
            if getattr(self, name) < (0 if name == "epochs" else 1):
                raise ConfigError(f"{name} must be positive")
        if not 0 <= self.val_fraction < 1:
            raise ConfigError("val_fraction must be in [0, 1)")
        self.hyper()

    def hyper(self) -> HyperParams:
        try:
            return HyperParams(
                **{f.name: getattr(self, f.name) for f in fields(HyperParams)}
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return cls(**d)


PATH_KEYS = ("corpus", "labels", "val_corpus", "stopwords", "positive_lexicon", "negative_lexicon")


def _convert(f, raw):
    kind = f.type if isinstance(f.type, type) else {"int": int, "float": float, "str": str}[f.type]
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{f.name}: cannot parse {raw!r} as {kind.__name__}") from None


def parse_config(text, base_dir=None, overrides=None) -> TrainConfig:
    by_name = {f.name: f for f in fields(TrainConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in by_name:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _convert(by_name[key], raw)
    for key, raw in (overrides or {}).items():
        values[key] = raw if not isinstance(raw, str) else _convert(by_name[key], raw)
    if base_dir is not None:
        for key in PATH_KEYS:
            if values.get(key):
                values[key] = str((Path(base_dir) / values[key]).resolve())
    return TrainConfig(**values)


def load_config(path, overrides=None) -> TrainConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), path.parent, overrides)


def format_config(cfg: TrainConfig, with_docs=False) -> str:
    lines = []
    for f in fields(cfg):
        if with_docs:
            lines.append(f"# {f.metadata['doc']}")
        lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    return "\n".join(lines) + "\n"
