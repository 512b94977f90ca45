import numpy as np
import pytest
import torch

from conftest import tiny_config, toy_dataset
from put_nn import TrainConfig, Trainer, load_checkpoint, load_trainer, train
from put_nn.training import VARIANTS


class TestConfig:
    def test_variant_presets(self):
        put1 = TrainConfig.for_variant("put1")
        assert not put1.masked_consistency and not put1.equirect and not put1.merged_input
        assert put1.in_channels == 4
        full = TrainConfig.for_variant("full")
        assert full.masked_consistency and full.equirect and full.merged_input
        cut = TrainConfig.for_variant("cut")
        assert not cut.use_consistency
        with pytest.raises(ValueError):
            TrainConfig.for_variant("putx")

    def test_paper_scale_defaults(self):
        cfg = TrainConfig()
        assert cfg.lr == pytest.approx(2e-4)
        assert (cfg.lambda_gan, cfg.lambda_cons) == (1.0, 10.0)
        assert (cfg.lambda_contr_s, cfg.lambda_contr_r) == (0.5, 0.5)
        assert cfg.tau == pytest.approx(0.07)

    def test_lr_schedule_fixed_then_linear_decay(self):
        cfg = tiny_config(epochs=8, decay_epochs=2)
        factors = [cfg.lr_factor(e) for e in range(9)]
        assert factors[:6] == [1.0] * 6
        assert factors[6] == pytest.approx(1.0)
        assert factors[7] == pytest.approx(0.5)
        assert factors[8] == pytest.approx(0.0)
        assert all(a >= b for a, b in zip(factors, factors[1:]))

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            tiny_config(lr=0.0)
        with pytest.raises(ValueError):
            tiny_config(tau=-1.0)
        with pytest.raises(ValueError):
            tiny_config(crop_h=30)


class TestTraining:
    def test_smoke_loss_decreases_median_of_three_seeds(self):
        # 8-image toy set, 50 optimization steps; stochastic, so assert on
        # the median improvement across seeds.
        improvements = []
        for seed in (0, 1, 2):
            partials, masks, reals = toy_dataset(n=8, seed=seed)
            config = tiny_config(epochs=10, steps_per_epoch=5, seed=seed)
            trainer = train((partials, masks), reals, config)
            assert len(trainer.history) == 50
            improvements.append(trainer.history[0]["total"] - trainer.history[-1]["total"])
        assert float(np.median(improvements)) > 0.0

    def test_lambda2_zero_equals_cut_objective(self):
        partials, masks, reals = toy_dataset(n=2, seed=5)
        full_zero = Trainer(tiny_config(lambda_cons=0.0))
        cut = Trainer(tiny_config(use_consistency=False))

        x = (partials[0] * 2 - 1)[None]
        m = masks[0][None]
        y = (reals[0] * 2 - 1)[None]
        torch.manual_seed(123)
        total_a = float(full_zero.compute_generator_losses(x, m, y)["total"].detach())
        torch.manual_seed(123)
        total_b = float(cut.compute_generator_losses(x, m, y)["total"].detach())
        assert total_a == pytest.approx(total_b, abs=1e-6)

    def test_step_updates_all_parameter_groups(self):
        partials, masks, reals = toy_dataset(n=2, seed=7)
        trainer = Trainer(tiny_config())
        before = [p.detach().clone() for p in trainer.generator.parameters()]
        x = (partials[0] * 2 - 1)[None]
        trainer.step(x, masks[0][None], (reals[0] * 2 - 1)[None])
        after = list(trainer.generator.parameters())
        assert any(not torch.equal(a, b) for a, b in zip(before, after))

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train(([], []), [], tiny_config())


class TestCheckpoint:
    def test_roundtrip_reproduces_forward(self, tmp_path):
        partials, masks, reals = toy_dataset(n=2, seed=9)
        config = tiny_config(epochs=1, steps_per_epoch=2)
        trainer = train((partials, masks), reals, config, tmp_path / "ckpt.pt")

        gen, loaded_cfg = load_checkpoint(tmp_path / "ckpt.pt")
        assert loaded_cfg.ngf == config.ngf
        x = (partials[0] * 2 - 1)[None]
        trainer.generator.eval()
        with torch.no_grad():
            a = trainer.generator(x)
            b = gen(x)
        assert torch.equal(a, b)

    def test_full_trainer_resume(self, tmp_path):
        partials, masks, reals = toy_dataset(n=2, seed=11)
        config = tiny_config(epochs=1, steps_per_epoch=1)
        trainer = train((partials, masks), reals, config, tmp_path / "ckpt.pt")
        resumed = load_trainer(tmp_path / "ckpt.pt")
        assert resumed.epoch == trainer.epoch
        for a, b in zip(trainer.discriminator.parameters(), resumed.discriminator.parameters()):
            assert torch.equal(a, b)


def test_variant_table_is_complete():
    assert set(VARIANTS) == {"put1", "put2", "put3", "put4", "full", "cut"}
