"""Trainer for the translation network: full objective, ablation variants,
learning-rate schedule, and checkpoint I/O."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import torch

from .data import PairSampler, load_partial_dir, load_real_dir, luminance
from .losses import adversarial_loss, consistency_loss, patch_nce_loss
from .model import PatchDiscriminator, PatchProjector, ResnetGenerator

# Ablation presets: (masked consistency, equirect first conv, merged 3-channel
# input); "cut" drops the consistency term entirely.
VARIANTS = {
    "put1": dict(masked_consistency=False, equirect=False, merged_input=False),
    "put2": dict(masked_consistency=False, equirect=False, merged_input=True),
    "put3": dict(masked_consistency=False, equirect=True, merged_input=True),
    "put4": dict(masked_consistency=True, equirect=False, merged_input=True),
    "full": dict(),
    "cut": dict(use_consistency=False),
}


@dataclass
class TrainConfig:
    epochs: int = 50
    decay_epochs: int = 12  # linear decay over the final quarter by default
    steps_per_epoch: int = 0  # 0 -> one step per partial image
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    lambda_gan: float = 1.0
    lambda_cons: float = 10.0
    lambda_contr_s: float = 0.5
    lambda_contr_r: float = 0.5
    tau: float = 0.07
    nce_layers: tuple = (0, 1, 2, 3, 4)
    n_locations: int = 256
    masked_consistency: bool = True
    equirect: bool = True
    merged_input: bool = True
    use_consistency: bool = True
    gan_mode: str = "vanilla"
    ngf: int = 64
    ndf: int = 64
    proj_dim: int = 256
    crop_h: int = 64
    crop_w: int = 128
    mask_coverage: tuple = (0.2, 0.6)
    seed: int = 0

    def __post_init__(self):
        if min(self.lambda_gan, self.lambda_cons, self.lambda_contr_s, self.lambda_contr_r) < 0:
            raise ValueError("loss weights must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.crop_h % 4 or self.crop_w % 4:
            raise ValueError("crop dims must be divisible by 4")

    @classmethod
    def for_variant(cls, variant: str, **overrides) -> "TrainConfig":
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r} (have {sorted(VARIANTS)})")
        merged = dict(VARIANTS[variant])
        merged.update(overrides)
        return cls(**merged)

    @property
    def in_channels(self) -> int:
        return 3 if self.merged_input else 4

    def lr_factor(self, epoch: int) -> float:
        """1.0 through the fixed phase, then linear decay to 0 after the end."""
        fixed = self.epochs - self.decay_epochs
        if epoch < fixed:
            return 1.0
        return max(0.0, (self.epochs - epoch) / max(self.decay_epochs, 1))


class Trainer:
    """Owns g, the shared-encoder projection heads, and the discriminator."""

    def __init__(self, config: TrainConfig):
        self.config = config
        torch.manual_seed(config.seed)
        self.generator = ResnetGenerator(config.in_channels, config.ngf, config.equirect)
        self.discriminator = PatchDiscriminator(3, config.ndf)
        self.projector = PatchProjector(config.proj_dim)
        # Materialize the lazy projection heads so the optimizer sees them.
        with torch.no_grad():
            dummy = torch.zeros(1, config.in_channels, config.crop_h, config.crop_w)
            self.projector(self.generator.encode(dummy, config.nce_layers), config.n_locations)

        betas = (config.beta1, config.beta2)
        self.opt_g = torch.optim.Adam(self.generator.parameters(), lr=config.lr, betas=betas)
        self.opt_d = torch.optim.Adam(self.discriminator.parameters(), lr=config.lr, betas=betas)
        self.opt_f = torch.optim.Adam(self.projector.parameters(), lr=config.lr, betas=betas)
        self.schedulers = [
            torch.optim.lr_scheduler.LambdaLR(opt, config.lr_factor)
            for opt in (self.opt_g, self.opt_d, self.opt_f)
        ]
        self.epoch = 0
        self.history: list[dict] = []

    def _expand_input(self, rgb: torch.Tensor) -> torch.Tensor:
        """Real images enter g; 4-channel mode prepends their gray plane."""
        if self.config.merged_input:
            return rgb
        return torch.cat([luminance(rgb), rgb], dim=-3)

    def _nce(self, source: torch.Tensor, translated: torch.Tensor):
        cfg = self.config
        feat_k = self.generator.encode(source, cfg.nce_layers)
        feat_q = self.generator.encode(translated, cfg.nce_layers)
        k_proj, ids = self.projector(feat_k, cfg.n_locations)
        q_proj, _ = self.projector(feat_q, cfg.n_locations, sample_ids=ids)
        return patch_nce_loss(q_proj, k_proj, cfg.tau)

    def compute_generator_losses(self, x, mask, y, fake=None) -> dict:
        """All generator-side terms plus their weighted total (no stepping)."""
        cfg = self.config
        if fake is None:
            fake = self.generator(x)
        gen_adv, _ = adversarial_loss(self.discriminator(y).detach(), self.discriminator(fake), cfg.gan_mode)
        terms = {"gan": gen_adv}
        if cfg.use_consistency:
            terms["cons"] = consistency_loss(fake, x[:, -3:], mask, cfg.masked_consistency)
        terms["contr_s"] = self._nce(x, fake)
        idt_in = self._expand_input(y)
        terms["contr_r"] = self._nce(idt_in, self.generator(idt_in))
        total = (
            cfg.lambda_gan * terms["gan"]
            + cfg.lambda_cons * terms.get("cons", torch.zeros(()))
            + cfg.lambda_contr_s * terms["contr_s"]
            + cfg.lambda_contr_r * terms["contr_r"]
        )
        terms["total"] = total
        return terms

    def step(self, x, mask, y) -> dict:
        fake = self.generator(x)

        d_real = self.discriminator(y)
        d_fake = self.discriminator(fake.detach())
        _, loss_d = adversarial_loss(d_real, d_fake, self.config.gan_mode)
        self.opt_d.zero_grad()
        loss_d.backward()
        self.opt_d.step()

        terms = self.compute_generator_losses(x, mask, y, fake=fake)
        self.opt_g.zero_grad()
        self.opt_f.zero_grad()
        terms["total"].backward()
        self.opt_g.step()
        self.opt_f.step()

        out = {k: float(v.detach()) for k, v in terms.items()}
        out["disc"] = float(loss_d.detach())
        return out

    def end_epoch(self):
        self.epoch += 1
        for sched in self.schedulers:
            sched.step()

    @property
    def current_lr(self) -> float:
        return self.opt_g.param_groups[0]["lr"]

    def state_dict(self) -> dict:
        return {
            "config": dataclasses.asdict(self.config),
            "generator": self.generator.state_dict(),
            "discriminator": self.discriminator.state_dict(),
            "projector": self.projector.state_dict(),
            "epoch": self.epoch,
        }

    def save(self, path) -> None:
        torch.save(self.state_dict(), path)


def train(dataset_partial, dataset_real, config: TrainConfig, out_path=None) -> Trainer:
    """Optimize the full objective; returns the trainer (and writes the
    checkpoint when out_path is given).

    Datasets are directories (frame_*.png/mask_*.png and real *.png) or
    prebuilt (images, masks) / images lists of (C,H,W) tensors in [0,1].
    """
    if isinstance(dataset_partial, (str, Path)):
        partials, masks = load_partial_dir(dataset_partial)
    else:
        partials, masks = dataset_partial
    reals = load_real_dir(dataset_real) if isinstance(dataset_real, (str, Path)) else dataset_real
    if not partials or not reals:
        raise ValueError("both datasets must be nonempty")

    trainer = Trainer(config)
    sampler = PairSampler(
        partials,
        masks,
        reals,
        config.crop_h,
        config.crop_w,
        config.mask_coverage,
        seed=config.seed,
    )
    steps = config.steps_per_epoch or len(partials)
    for _ in range(config.epochs):
        for _ in range(steps):
            x, mask, y = sampler.sample()
            trainer.history.append(trainer.step(x, mask, y))
        trainer.end_epoch()
    if out_path is not None:
        trainer.save(out_path)
    return trainer


def load_checkpoint(path) -> tuple[ResnetGenerator, TrainConfig]:
    """Rebuild the generator (eval mode) from a training checkpoint."""
    blob = torch.load(path, map_location="cpu", weights_only=True)
    cfg_data = dict(blob["config"])
    cfg_data["nce_layers"] = tuple(cfg_data["nce_layers"])
    cfg_data["mask_coverage"] = tuple(cfg_data["mask_coverage"])
    config = TrainConfig(**cfg_data)
    gen = ResnetGenerator(config.in_channels, config.ngf, config.equirect)
    gen.load_state_dict(blob["generator"])
    gen.eval()
    return gen, config


def load_trainer(path) -> Trainer:
    """Full resume: generator, discriminator, projection heads, epoch."""
    blob = torch.load(path, map_location="cpu", weights_only=True)
    cfg_data = dict(blob["config"])
    cfg_data["nce_layers"] = tuple(cfg_data["nce_layers"])
    cfg_data["mask_coverage"] = tuple(cfg_data["mask_coverage"])
    trainer = Trainer(TrainConfig(**cfg_data))
    trainer.generator.load_state_dict(blob["generator"])
    trainer.discriminator.load_state_dict(blob["discriminator"])
    trainer.projector.load_state_dict(blob["projector"])
    trainer.epoch = blob["epoch"]
    return trainer
