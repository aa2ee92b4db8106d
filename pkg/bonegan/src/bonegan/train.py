"""Adversarial training loop: paired BCE + weighted L1 reconstruction."""

import argparse
import math
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F
from torch.utils.data import DataLoader

from .container import read_records
from .data import BoneDataset
from .models import (DiscriminatorConfig, GeneratorConfig,
                     build_discriminator, build_generator)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization constants; reconstruction weight dominates by design."""

    lambda_recon: float = 100.0
    learning_rate: float = 1e-4
    batch_size: int = 2          # full-scale runs use 4; 2 is the toy default
    epochs: int = 10
    early_stop_patience: int = 5

    def __post_init__(self):
        for name in ("lambda_recon", "learning_rate", "batch_size",
                     "epochs", "early_stop_patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class StepLosses:
    loss_d: float
    loss_g: float
    loss_adv: float
    loss_recon: float


def make_optimizers(generator, discriminator, config: TrainConfig) -> tuple:
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.learning_rate)
    opt_d = torch.optim.Adam(discriminator.parameters(),
                             lr=config.learning_rate)
    return opt_g, opt_d


def train_step(batch, models, optimizers, config: TrainConfig) -> StepLosses:
    """One paired update: discriminator on real/fake BCE, then generator.

    The discriminator sees (image, bone map) channel pairs; the
    generator loss is adv + lambda * L1 against the enhancement target.
    Any non-finite loss aborts with the offending values.
    """
    generator, discriminator = models
    opt_g, opt_d = optimizers
    rf, target, bpm = batch["rf"], batch["target"], batch["bpm"]

    fake = generator(rf)
    real_pair = torch.cat([target, bpm], dim=1)
    fake_pair = torch.cat([fake.detach(), bpm], dim=1)

    d_real = discriminator(real_pair)
    d_fake = discriminator(fake_pair)
    loss_d = (F.binary_cross_entropy(d_real, torch.ones_like(d_real))
              + F.binary_cross_entropy(d_fake, torch.zeros_like(d_fake)))
    opt_d.zero_grad()
    loss_d.backward()
    opt_d.step()

    d_out = discriminator(torch.cat([fake, bpm], dim=1))
    loss_adv = F.binary_cross_entropy(d_out, torch.ones_like(d_out))
    loss_recon = F.l1_loss(fake, target)
    loss_g = loss_adv + config.lambda_recon * loss_recon
    opt_g.zero_grad()
    loss_g.backward()
    opt_g.step()

    losses = StepLosses(loss_d=loss_d.item(), loss_g=loss_g.item(),
                        loss_adv=loss_adv.item(),
                        loss_recon=loss_recon.item())
    if not all(math.isfinite(v) for v in
               (losses.loss_d, losses.loss_g, losses.loss_adv,
                losses.loss_recon)):
        raise FloatingPointError(
            f"non-finite training loss: d={losses.loss_d} g={losses.loss_g} "
            f"adv={losses.loss_adv} recon={losses.loss_recon}")
    return losses


class EarlyStopper:
    """Stops after exactly `patience` updates without strict improvement."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError("patience must be >= 1")
        self.patience = patience
        self.best = math.inf
        self.stale = 0
        self.improved = False

    def update(self, value: float) -> bool:
        self.improved = value < self.best
        if self.improved:
            self.best = value
            self.stale = 0
        else:
            self.stale += 1
        return self.stale >= self.patience


def validation_loss(generator, dataset) -> float:
    """Mean reconstruction L1 over a held-out dataset."""
    generator.eval()
    total = 0.0
    with torch.no_grad():
        for i in range(len(dataset)):
            sample = dataset[i]
            pred = generator(sample["rf"][None])
            total += float(F.l1_loss(pred, sample["target"][None]))
    generator.train()
    return total / len(dataset)


def fit(generator, discriminator, train_dataset, val_dataset,
        config: TrainConfig, out_dir, seed: int = 0) -> dict:
    """Run the training loop with early stopping and on-disk artifacts.

    Writes loss_log.txt (one "step, loss_D, loss_G, loss_adv,
    loss_recon" line per step), checkpoint_last.pt every epoch, and
    checkpoint_best.pt whenever the validation loss improves.
    """
    if len(train_dataset) == 0 or len(val_dataset) == 0:
        raise ValueError("fit needs non-empty train and validation sets")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sampler_rng = torch.Generator()
    sampler_rng.manual_seed(seed)
    # ragged 1-sample batches can starve the discriminator's batch norm,
    # so drop the remainder whenever a full batch exists
    loader = DataLoader(train_dataset, batch_size=config.batch_size,
                        shuffle=True, generator=sampler_rng,
                        drop_last=len(train_dataset) >= config.batch_size)
    optimizers = make_optimizers(generator, discriminator, config)
    stopper = EarlyStopper(config.early_stop_patience)
    history = {"train": [], "val_loss": [], "epochs_run": 0,
               "stopped_early": False}
    step = 0
    with open(out_dir / "loss_log.txt", "w") as log:
        for epoch in range(1, config.epochs + 1):
            generator.train()
            discriminator.train()
            for batch in loader:
                losses = train_step(batch, (generator, discriminator),
                                    optimizers, config)
                step += 1
                log.write(f"{step}, {losses.loss_d:.6f}, "
                          f"{losses.loss_g:.6f}, {losses.loss_adv:.6f}, "
                          f"{losses.loss_recon:.6f}\n")
                history["train"].append(losses)
            val = validation_loss(generator, val_dataset)
            history["val_loss"].append(val)
            history["epochs_run"] = epoch
            state = {"epoch": epoch,
                     "generator": generator.state_dict(),
                     "discriminator": discriminator.state_dict(),
                     "val_loss": val}
            torch.save(state, out_dir / "checkpoint_last.pt")
            stop = stopper.update(val)
            if stopper.improved:
                torch.save(state, out_dir / "checkpoint_best.pt")
            if stop:
                history["stopped_early"] = True
                break
    return history


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="train the enhancement GAN on an exported dataset")
    parser.add_argument("dataset", help="USBF1 dataset container")
    parser.add_argument("--out", default="runs/bonegan")
    parser.add_argument("--rows", type=int, default=128)
    parser.add_argument("--cols", type=int, default=64)
    parser.add_argument("--base-filters", type=int, default=16)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=2)
    parser.add_argument("--learning-rate", type=float, default=1e-4)
    parser.add_argument("--lambda-recon", type=float, default=100.0)
    parser.add_argument("--patience", type=int, default=5)
    parser.add_argument("--val-count", type=int, default=1,
                        help="records held out for validation (from the end)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    _, records = read_records(args.dataset)
    if len(records) < 2:
        print("error: need at least 2 records to hold out validation")
        return 1
    n_val = min(max(args.val_count, 1), len(records) - 1)
    shape = (args.rows, args.cols)
    train_ds = BoneDataset(records[:-n_val], input_shape=shape)
    val_ds = BoneDataset(records[-n_val:], input_shape=shape)

    torch.manual_seed(args.seed)
    generator = build_generator(GeneratorConfig(
        input_shape=(args.rows, args.cols, 1),
        base_filters=args.base_filters))
    discriminator = build_discriminator(DiscriminatorConfig())
    config = TrainConfig(lambda_recon=args.lambda_recon,
                         learning_rate=args.learning_rate,
                         batch_size=args.batch_size, epochs=args.epochs,
                         early_stop_patience=args.patience)
    history = fit(generator, discriminator, train_ds, val_ds, config,
                  args.out, seed=args.seed)
    best = min(history["val_loss"])
    print(f"trained {history['epochs_run']} epochs "
          f"({len(history['train'])} steps); best val L1 {best:.6f}; "
          f"stopped early: {history['stopped_early']}")
    print(f"artifacts in {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
