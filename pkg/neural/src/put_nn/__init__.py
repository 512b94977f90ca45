"""Contrastive image-translation network for the panoramic texture baker."""

from .data import PairSampler, load_partial_dir, load_real_dir, synthesize_mask
from .features import export_features, image_features, random_backbone
from .losses import adversarial_loss, consistency_loss, contrastive_loss, patch_nce_loss
from .model import EquirectConv2d, PatchDiscriminator, PatchProjector, ResnetGenerator
from .serve import ProtocolError, read_frame, serve, translate_array, write_frame
from .training import VARIANTS, TrainConfig, Trainer, load_checkpoint, load_trainer, train

__all__ = [
    "EquirectConv2d",
    "PairSampler",
    "PatchDiscriminator",
    "PatchProjector",
    "ProtocolError",
    "ResnetGenerator",
    "TrainConfig",
    "Trainer",
    "VARIANTS",
    "adversarial_loss",
    "consistency_loss",
    "contrastive_loss",
    "export_features",
    "image_features",
    "load_checkpoint",
    "load_partial_dir",
    "load_real_dir",
    "load_trainer",
    "patch_nce_loss",
    "random_backbone",
    "read_frame",
    "serve",
    "synthesize_mask",
    "train",
    "translate_array",
    "write_frame",
]
