"""Two-headed temporal-convolutional autoencoder for causal inference.

For each ordered pair (driver, target) two networks are trained: one seeing
the real driver window alongside the target's own window, one seeing a
surrogate driver instead. Both predict the target window shifted `lag`
steps into the future. Each encoder head is noise -> TCN -> 1x1 conv ->
average pooling -> shrinking dense stack; the two latents combine by
element-wise multiplication, and the decoder mirrors the encoder (growing
dense stack -> upsampling -> TCN -> linear readout). The gap between the
real-driver and surrogate-driver explained variance, summarized window by
window with the Comparative Surrogate Granger Index, is the causal score.

Training happens once on the full series; time-resolved scores come from
rolling evaluation windows, so time-varying coupling needs no refitting.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigInvalidError, DivergedError, TooShortError
from .metrics import CsgiSeries, CsgiTimecourse, rolling_csgi
from .nn import (
    Adam,
    AvgPool1d,
    CausalConv1d,
    Dense,
    Dropout,
    Elu,
    GaussianNoise,
    Module,
    TcnBlock,
    Tensor,
    Upsample1d,
    load_weights,
    mse,
    no_grad,
    save_weights,
)
from .nn import autodiff as ad
from .surrogate import SurrogateKind, make_surrogate, series_seed
from .timeseries import TimeSeries, autocorrelation_time, make_sequences, zscore

__all__ = [
    "TaciConfig",
    "TaciModelSet",
    "TrainingHistory",
    "TwoHeadedAutoencoder",
    "build_model",
    "train_pair",
    "evaluate_pair",
    "desk_config",
    "save_model_set",
    "load_model_set",
]

NETWORK_KEYS = ("full_xy", "surr_xy", "full_yx", "surr_yx")


@dataclass(frozen=True)
class TaciConfig:
    """Architecture and training settings for one model set."""

    nb_filters: int = 32
    kernel_size: int = 32
    dilations: tuple = (1, 2, 4, 8, 16, 32)
    nb_stacks: int = 1
    ts_dimension: int = 1
    dropout_rate_tcn: float = 0.0
    dropout_rate_hidden: float = 0.0
    latent_sample_rate: int = 2
    epochs: int = 300
    batch_size: int = 512
    shuffle: bool = True
    noise_sigma: float = 0.05
    seq_length: int = 20
    lag: int = 10
    encoder_widths: tuple = (64, 32, 16)
    decoder_widths: tuple = (16, 32, 64)
    learning_rate: float = 1e-3
    plateau_patience: int = 10
    plateau_factor: float = 0.5
    min_lr: float = 1e-6
    early_stop_patience: int = 25
    val_fraction: float = 0.2
    train_stride: int = 1
    window_len: int = 1000
    surrogate_kind: SurrogateKind = SurrogateKind.UNIFORM_RANDOM

    def __post_init__(self):
        checks = [
            (self.nb_filters >= 1, "nb_filters must be >= 1"),
            (self.kernel_size >= 1, "kernel_size must be >= 1"),
            (len(self.dilations) >= 1, "dilations must be non-empty"),
            (all(d >= 1 for d in self.dilations), "dilations must be >= 1"),
            (self.nb_stacks >= 1, "nb_stacks must be >= 1"),
            (self.ts_dimension == 1, "only scalar series are supported"),
            (0.0 <= self.dropout_rate_tcn < 0.5 + 1e-12, "dropout_rate_tcn in [0, 0.5]"),
            (0.0 <= self.dropout_rate_hidden < 0.5 + 1e-12, "dropout_rate_hidden in [0, 0.5]"),
            (0.0 <= self.noise_sigma <= 0.5, "noise_sigma in [0, 0.5]"),
            (10 <= self.seq_length <= 100, "seq_length in [10, 100]"),
            (10 <= self.lag <= 100, "lag in [10, 100]"),
            (self.latent_sample_rate >= 1, "latent_sample_rate must be >= 1"),
            (
                self.seq_length % self.latent_sample_rate == 0,
                "latent_sample_rate must divide seq_length",
            ),
            (len(self.encoder_widths) >= 1, "encoder_widths must be non-empty"),
            (len(self.decoder_widths) >= 1, "decoder_widths must be non-empty"),
            (
                all(a >= b for a, b in zip(self.encoder_widths, self.encoder_widths[1:])),
                "encoder_widths must be non-increasing",
            ),
            (
                all(a <= b for a, b in zip(self.decoder_widths, self.decoder_widths[1:])),
                "decoder_widths must be non-decreasing",
            ),
            (self.epochs >= 1, "epochs must be >= 1"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (self.learning_rate > 0, "learning_rate must be positive"),
            (0.0 < self.plateau_factor < 1.0, "plateau_factor in (0, 1)"),
            (0.0 < self.val_fraction < 0.5 + 1e-12, "val_fraction in (0, 0.5]"),
            (self.train_stride >= 1, "train_stride must be >= 1"),
            (self.window_len >= 10, "window_len must be >= 10"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigInvalidError(msg)
        object.__setattr__(self, "dilations", tuple(int(d) for d in self.dilations))
        object.__setattr__(self, "encoder_widths", tuple(int(w) for w in self.encoder_widths))
        object.__setattr__(self, "decoder_widths", tuple(int(w) for w in self.decoder_widths))
        if isinstance(self.surrogate_kind, str):
            object.__setattr__(self, "surrogate_kind", SurrogateKind(self.surrogate_kind))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["surrogate_kind"] = self.surrogate_kind.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TaciConfig":
        data = dict(data)
        for key in ("dilations", "encoder_widths", "decoder_widths"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


def desk_config(**overrides) -> TaciConfig:
    """Small-network preset sized so a four-network training run on a few
    tens of thousands of samples finishes in minutes on a CPU."""
    base = dict(
        nb_filters=16,
        kernel_size=4,
        dilations=(1, 2, 4),
        seq_length=16,
        lag=10,
        encoder_widths=(64, 32, 16),
        decoder_widths=(16, 32, 64),
        epochs=60,
        batch_size=128,
        learning_rate=3e-3,
        noise_sigma=0.01,
        dropout_rate_tcn=0.0,
        dropout_rate_hidden=0.0,
        train_stride=3,
        window_len=1000,
        early_stop_patience=12,
        plateau_patience=6,
    )
    base.update(overrides)
    return TaciConfig(**base)


class _Encoder(Module):
    """noise -> causal TCN -> 1x1 conv -> average pool -> flatten ->
    shrinking dense stack, ending in one latent vector per window."""

    def __init__(self, cfg: TaciConfig, rng: np.random.Generator):
        self.pooled_len = cfg.seq_length // cfg.latent_sample_rate
        self.noise = GaussianNoise(cfg.noise_sigma)
        self.tcn = TcnBlock(
            cfg.ts_dimension,
            cfg.nb_filters,
            cfg.kernel_size,
            cfg.dilations,
            cfg.nb_stacks,
            cfg.dropout_rate_tcn,
            rng,
        )
        self.conv = CausalConv1d(cfg.nb_filters, cfg.nb_filters, 1, 1, rng)
        self.conv_act = Elu()
        self.pool = AvgPool1d(cfg.latent_sample_rate)
        dense = []
        width_in = self.pooled_len * cfg.nb_filters
        for width in cfg.encoder_widths:
            dense.append(Dense(width_in, width, rng))
            width_in = width
        self.dense = dense
        self.act = Elu()
        self.drop = Dropout(cfg.dropout_rate_hidden)

    def forward(self, x, training=False, rng=None):
        h = self.noise(x, training=training, rng=rng)
        h = self.tcn(h, training=training, rng=rng)
        h = self.conv_act(self.conv(h))
        h = self.pool(h)
        h = ad.reshape(h, (h.data.shape[0], -1))
        for layer in self.dense:
            h = self.drop(self.act(layer(h)), training=training, rng=rng)
        return h


class _Decoder(Module):
    """Growing dense stack -> window-shaped map -> repeat upsampling ->
    causal TCN mirroring the encoder's -> linear readout."""

    def __init__(self, cfg: TaciConfig, rng: np.random.Generator):
        pooled_len = cfg.seq_length // cfg.latent_sample_rate
        dense = []
        width_in = cfg.encoder_widths[-1]
        for width in cfg.decoder_widths:
            dense.append(Dense(width_in, width, rng))
            width_in = width
        self.dense = dense
        self.act = Elu()
        self.drop = Dropout(cfg.dropout_rate_hidden)
        self.expand = Dense(width_in, pooled_len * cfg.nb_filters, rng)
        self.pooled_shape = (pooled_len, cfg.nb_filters)
        self.upsample = Upsample1d(cfg.latent_sample_rate)
        self.tcn = TcnBlock(
            cfg.nb_filters,
            cfg.nb_filters,
            cfg.kernel_size,
            cfg.dilations,
            cfg.nb_stacks,
            cfg.dropout_rate_tcn,
            rng,
        )
        self.readout = Dense(cfg.nb_filters, cfg.ts_dimension, rng)

    def forward(self, z, training=False, rng=None):
        h = z
        for layer in self.dense:
            h = self.drop(self.act(layer(h)), training=training, rng=rng)
        h = self.act(self.expand(h))
        h = ad.reshape(h, (h.data.shape[0],) + self.pooled_shape)
        h = self.upsample(h)
        h = self.tcn(h, training=training, rng=rng)
        return self.readout(h)


class TwoHeadedAutoencoder(Module):
    """The full network: two encoder heads joined multiplicatively in the
    bottleneck, one decoder predicting the target's shifted window."""

    def __init__(self, cfg: TaciConfig, seed: int = 0):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7AC1]))
        self.cfg = cfg
        self.enc_driver = _Encoder(cfg, rng)
        self.enc_target = _Encoder(cfg, rng)
        self.decoder = _Decoder(cfg, rng)

    def encode(self, driver: Tensor, target: Tensor, training=False, rng=None):
        za = self.enc_driver(driver, training=training, rng=rng)
        zb = self.enc_target(target, training=training, rng=rng)
        return ad.mul(za, zb)

    def forward_pair(self, driver: Tensor, target: Tensor, training=False, rng=None):
        z = self.encode(driver, target, training=training, rng=rng)
        return self.decoder(z, training=training, rng=rng)

    def forward(self, x, training=False, rng=None):
        raise TypeError("use forward_pair(driver, target) for two-headed input")

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.parameters())


def build_model(cfg: TaciConfig, seed: int = 0) -> TwoHeadedAutoencoder:
    """Construct the two-headed network; structure is a pure function of the
    config, weights of (config, seed)."""
    return TwoHeadedAutoencoder(cfg, seed=seed)


@dataclass
class TrainingHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    best_epoch: int = -1
    stopped_epoch: int = -1

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TaciModelSet:
    """Four trained networks for one series pair plus everything needed to
    reproduce their evaluation: the surrogate series actually used, the
    scaling applied to the raw inputs, and the training histories."""

    cfg: TaciConfig
    networks: dict
    surrogates: dict
    scaling: dict
    histories: dict
    seed: int

    def network(self, key: str) -> TwoHeadedAutoencoder:
        return self.networks[key]


def _standardize(ts: TimeSeries) -> tuple[np.ndarray, float, float]:
    mu = float(ts.values.mean())
    sd = float(ts.values.std(ddof=1))
    if sd == 0.0:
        raise DivergedError(f"series {ts.label!r} is constant; cannot train")
    return (ts.values - mu) / sd, mu, sd


def _as_input(windows: np.ndarray) -> np.ndarray:
    return windows[:, :, None]


def _batched_forward(
    net: TwoHeadedAutoencoder, driver: np.ndarray, target: np.ndarray, batch: int
) -> np.ndarray:
    """Evaluation-mode forward over all sequences, returning (N, L)."""
    outs = []
    with no_grad():
        for lo in range(0, driver.shape[0], batch):
            hi = lo + batch
            pred = net.forward_pair(
                Tensor(driver[lo:hi]), Tensor(target[lo:hi]), training=False
            )
            outs.append(pred.data[:, :, 0])
    return np.concatenate(outs, axis=0)


def _train_network(
    net: TwoHeadedAutoencoder,
    driver_seq: np.ndarray,
    target_seq: np.ndarray,
    future_seq: np.ndarray,
    cfg: TaciConfig,
    seed: int,
) -> TrainingHistory:
    """Fit one network with Adam, plateau learning-rate halving, early
    stopping, and best-validation checkpointing (weights restored)."""
    n = driver_seq.shape[0]
    n_val = max(1, int(round(cfg.val_fraction * n)))
    n_train = n - n_val
    if n_train < 1:
        raise TooShortError("not enough sequences for a train/validation split")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    optimizer = Adam(net.parameters(), lr=cfg.learning_rate)
    history = TrainingHistory()
    best_val = np.inf
    best_weights = None
    plateau_wait = 0
    stop_wait = 0
    order = np.arange(n_train)
    for epoch in range(cfg.epochs):
        if cfg.shuffle:
            rng.shuffle(order)
        epoch_loss = 0.0
        seen = 0
        for lo in range(0, n_train, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            pred = net.forward_pair(
                Tensor(_as_input(driver_seq[idx])),
                Tensor(_as_input(target_seq[idx])),
                training=True,
                rng=rng,
            )
            loss = mse(pred, Tensor(_as_input(future_seq[idx])))
            if not np.isfinite(loss.data):
                raise DivergedError(f"training loss became non-finite at epoch {epoch}")
            net.zero_grad()
            ad.backward(loss)
            optimizer.step()
            epoch_loss += float(loss.data) * idx.size
            seen += idx.size
        val_pred = _batched_forward(
            net,
            _as_input(driver_seq[n_train:]),
            _as_input(target_seq[n_train:]),
            cfg.batch_size,
        )
        val_loss = float(np.mean((val_pred - future_seq[n_train:]) ** 2))
        if not np.isfinite(val_loss):
            raise DivergedError(f"validation loss became non-finite at epoch {epoch}")
        history.train_loss.append(epoch_loss / seen)
        history.val_loss.append(val_loss)
        history.lr.append(optimizer.lr)
        if val_loss < best_val - 1e-12:
            best_val = val_loss
            best_weights = [p.data.copy() for p in net.parameters()]
            history.best_epoch = epoch
            plateau_wait = 0
            stop_wait = 0
        else:
            plateau_wait += 1
            stop_wait += 1
            if plateau_wait >= cfg.plateau_patience:
                optimizer.lr = max(cfg.min_lr, optimizer.lr * cfg.plateau_factor)
                plateau_wait = 0
            if stop_wait >= cfg.early_stop_patience:
                break
    history.stopped_epoch = len(history.train_loss) - 1
    if best_weights is not None:
        for p, w in zip(net.parameters(), best_weights):
            p.data = w
    return history


def train_pair(
    x: TimeSeries, y: TimeSeries, cfg: TaciConfig, seed: int = 0
) -> TaciModelSet:
    """Train the four networks of a pair on standardized full-length series.

    Direction x -> y compares (x, y) -> future y against (x_surrogate, y)
    -> future y; the candidate driver is the surrogated input, the target's
    own history is always kept intact.
    """
    if len(x) != len(y):
        raise TooShortError("series must have equal length")
    if len(x) < 10 * (cfg.seq_length + cfg.lag):
        raise TooShortError(
            f"need at least 10*(seq_length+lag) = {10 * (cfg.seq_length + cfg.lag)} samples"
        )
    for ts in (x, y):
        if len(ts) >= 100 and cfg.seq_length <= autocorrelation_time(ts):
            warnings.warn(
                f"seq_length {cfg.seq_length} does not exceed the "
                f"autocorrelation time of {ts.label or 'input'}",
                stacklevel=2,
            )
    zx, mu_x, sd_x = _standardize(x)
    zy, mu_y, sd_y = _standardize(y)
    zx_ts = TimeSeries(zx, dt=x.dt, label=x.label)
    zy_ts = TimeSeries(zy, dt=y.dt, label=y.label)
    sx = zscore(
        make_surrogate(zx_ts, cfg.surrogate_kind, series_seed(seed, x.values))
    )
    sy = zscore(
        make_surrogate(zy_ts, cfg.surrogate_kind, series_seed(seed, y.values))
    )

    def sequences(driver: np.ndarray, target: np.ndarray):
        pair = make_sequences(
            TimeSeries(driver), TimeSeries(target), cfg.seq_length, cfg.lag,
            cfg.train_stride,
        )
        own = make_sequences(
            TimeSeries(target), TimeSeries(target), cfg.seq_length, cfg.lag,
            cfg.train_stride,
        )
        return pair.inputs, own.inputs, own.targets

    jobs = {
        "full_xy": sequences(zx, zy),
        "surr_xy": sequences(sx.values, zy),
        "full_yx": sequences(zy, zx),
        "surr_yx": sequences(sy.values, zx),
    }
    networks = {}
    histories = {}
    for i, key in enumerate(NETWORK_KEYS):
        net_seed = int(np.random.SeedSequence([seed, 100 + i]).generate_state(1)[0])
        net = build_model(cfg, seed=net_seed)
        driver_seq, target_seq, future_seq = jobs[key]
        histories[key] = _train_network(
            net, driver_seq, target_seq, future_seq, cfg, net_seed
        )
        networks[key] = net
    return TaciModelSet(
        cfg=cfg,
        networks=networks,
        surrogates={"x": sx, "y": sy},
        scaling={"mu_x": mu_x, "sd_x": sd_x, "mu_y": mu_y, "sd_y": sd_y},
        histories=histories,
        seed=seed,
    )


def _predict_series(
    net: TwoHeadedAutoencoder,
    driver: np.ndarray,
    target: np.ndarray,
    cfg: TaciConfig,
    batch: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Tile the series with non-overlapping sequences and return the
    flattened prediction along with the aligned actual values."""
    pair = make_sequences(
        TimeSeries(driver), TimeSeries(target), cfg.seq_length, cfg.lag,
        stride=cfg.seq_length,
    )
    own = make_sequences(
        TimeSeries(target), TimeSeries(target), cfg.seq_length, cfg.lag,
        stride=cfg.seq_length,
    )
    pred = _batched_forward(
        net, _as_input(pair.inputs), _as_input(own.inputs), batch
    )
    return pred.reshape(-1), own.targets.reshape(-1)


def evaluate_pair(
    models: TaciModelSet,
    x: TimeSeries,
    y: TimeSeries,
    window_len: int | None = None,
    stride: int | None = None,
    n_bootstrap: int = 100,
    seed: int = 0,
) -> CsgiTimecourse:
    """Rolling CSGI timecourse from one trained model set.

    Networks run in evaluation mode (noise and dropout off), predictions
    tile the whole series, and each rolling window is bootstrapped. The
    same model set serves every window; window start indices refer to the
    original sample axis.
    """
    cfg = models.cfg
    if window_len is None:
        window_len = cfg.window_len
    if stride is None:
        stride = window_len
    sc = models.scaling
    zx = (x.values - sc["mu_x"]) / sc["sd_x"]
    zy = (y.values - sc["mu_y"]) / sc["sd_y"]
    sx = models.surrogates["x"].values
    sy = models.surrogates["y"].values
    batch = cfg.batch_size

    def one_direction(key, driver, surrogate, target) -> CsgiSeries:
        pred_full, actual = _predict_series(
            models.network(f"full_{key}"), driver, target, cfg, batch
        )
        pred_surr, _ = _predict_series(
            models.network(f"surr_{key}"), surrogate, target, cfg, batch
        )
        return rolling_csgi(
            pred_full,
            pred_surr,
            actual,
            window_len=window_len,
            stride=stride,
            n_bootstrap=n_bootstrap,
            seed=series_seed(seed, target),
            window_offset=cfg.lag,
        )

    return CsgiTimecourse.from_directions(
        xy=one_direction("xy", zx, sx, zy), yx=one_direction("yx", zy, sy, zx)
    )


def save_model_set(models: TaciModelSet, directory) -> None:
    """Write four weight checkpoints, the surrogate series, and a manifest
    (config, seeds, scaling, training histories) into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for key, net in models.networks.items():
        save_weights(net, directory / f"{key}.npz")
    np.save(directory / "surrogate_x.npy", models.surrogates["x"].values)
    np.save(directory / "surrogate_y.npy", models.surrogates["y"].values)
    manifest = {
        "format_version": 1,
        "config": models.cfg.to_dict(),
        "seed": models.seed,
        "scaling": models.scaling,
        "histories": {k: h.to_dict() for k, h in models.histories.items()},
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2))


def load_model_set(directory) -> TaciModelSet:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    if manifest.get("format_version") != 1:
        raise ConfigInvalidError("unsupported model-set format version")
    cfg = TaciConfig.from_dict(manifest["config"])
    seed = manifest["seed"]
    networks = {}
    for i, key in enumerate(NETWORK_KEYS):
        net_seed = int(np.random.SeedSequence([seed, 100 + i]).generate_state(1)[0])
        net = build_model(cfg, seed=net_seed)
        load_weights(net, directory / f"{key}.npz")
        networks[key] = net
    surrogates = {
        "x": TimeSeries(np.load(directory / "surrogate_x.npy"), label="surrogate_x"),
        "y": TimeSeries(np.load(directory / "surrogate_y.npy"), label="surrogate_y"),
    }
    histories = {
        k: TrainingHistory(**v) for k, v in manifest["histories"].items()
    }
    return TaciModelSet(
        cfg=cfg,
        networks=networks,
        surrogates=surrogates,
        scaling=manifest["scaling"],
        histories=histories,
        seed=seed,
    )
