"""Training loop: burn-in, node batching, plateau decay, history.

Each epoch shuffles the nodes, partitions them into batches, and feeds
every within-batch pair to the loss. The first ``burn_in_epochs`` epochs
run at ``learning_rate / burn_in_factor``; afterwards, whenever the best
epoch loss fails to improve for ``plateau_patience`` epochs the base rate
is divided by ``plateau_factor``, and training stops once it falls below
``min_lr``. Everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .embedding import EmbeddingSet, init_embedding
from .errors import InvalidInputError
from .graphio import DistanceMatrix, Graph
from .losses import make_loss
from .manifolds import Manifold
from .optim import make_optimizer


@dataclass
class TrainConfig:
    loss: str = "stress"  # "neighborhood" | "stress" | "distortion" | "rsne:T"
    optimizer: str = "radam"  # "rsgd" | "radam"
    learning_rate: float = 0.1
    max_epochs: int = 3000
    batch_nodes: int = 512
    burn_in_epochs: int = 10
    burn_in_factor: float = 10.0
    plateau_patience: int = 50
    plateau_factor: float = 10.0
    min_lr: float = 1e-5
    seed: int = 0
    learn_scale: bool = False
    init_radius: float = 0.1

    def validate(self) -> None:
        if self.learning_rate <= 0 or self.max_epochs < 1 or self.batch_nodes < 1:
            raise InvalidInputError("bad training hyperparameters")
        if self.loss.startswith("rsne"):
            _, _, arg = self.loss.partition(":")
            if arg and float(arg) <= 0:
                raise InvalidInputError("rsne temperature must be positive")

    @classmethod
    def from_mapping(cls, mapping) -> "TrainConfig":
        kwargs = {}
        known = {f.name: f.type for f in fields(cls)}
        for key, raw in mapping.items():
            if key not in known:
                continue
            current = getattr(cls(), key)
            if isinstance(current, bool):
                kwargs[key] = str(raw).strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                kwargs[key] = int(raw)
            elif isinstance(current, float):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = str(raw).strip()
        return cls(**kwargs)


@dataclass
class History:
    epochs: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    rates: list = field(default_factory=list)

    def append(self, epoch: int, loss: float, lr: float) -> None:
        self.epochs.append(epoch)
        self.losses.append(loss)
        self.rates.append(lr)

    def save_csv(self, path) -> None:
        with open(Path(path), "w") as fh:
            fh.write("epoch,loss,lr\n")
            for e, l, r in zip(self.epochs, self.losses, self.rates):
                fh.write(f"{e},{l:.10g},{r:.6g}\n")


def train(
    graph: Graph | None,
    d: DistanceMatrix,
    manifold: Manifold,
    cfg: TrainConfig,
) -> tuple[EmbeddingSet, History]:
    """Learn an embedding of the (scaled) metric d on the manifold."""
    cfg.validate()
    if abs(d.values.max() - 1.0) > 1e-9:
        raise InvalidInputError("train expects a max-scaled distance matrix")
    m = d.m
    emb = init_embedding(manifold, m, cfg.seed, radius=cfg.init_radius)
    loss_fn = make_loss(cfg.loss, graph, d)
    opt = make_optimizer(cfg.optimizer, m, manifold.point_shape, cfg.learn_scale)
    shuffle_rng = np.random.Generator(np.random.Philox(key=(cfg.seed << 16) + 1))

    history = History()
    lr = cfg.learning_rate
    best = np.inf
    since_best = 0
    for epoch in range(cfg.max_epochs):
        lr_eff = lr / cfg.burn_in_factor if epoch < cfg.burn_in_epochs else lr
        perm = shuffle_rng.permutation(m)
        total = 0.0
        for start in range(0, m, cfg.batch_nodes):
            batch = np.sort(perm[start : start + cfg.batch_nodes])
            res = loss_fn(emb, batch)
            rgrads = manifold.egrad_to_rgrad(emb.points[batch], res.point_egrads)
            opt.step(emb, batch, rgrads, res.scale_grad, lr_eff)
            total += res.value
        history.append(epoch, total, lr_eff)
        if total < best - 1e-15:
            best = total
            since_best = 0
        else:
            since_best += 1
            if since_best > cfg.plateau_patience:
                lr /= cfg.plateau_factor
                since_best = 0
                if lr < cfg.min_lr:
                    break
    return emb, history
