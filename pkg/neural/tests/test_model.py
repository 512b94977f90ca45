import pytest
import torch

from put_nn import EquirectConv2d, PatchDiscriminator, ResnetGenerator, consistency_loss


class TestEquirectConv:
    def test_column_shift_equivariance_exact(self):
        torch.manual_seed(0)
        conv = EquirectConv2d(3, 6, 7)
        x = torch.randn(2, 3, 16, 32)
        with torch.no_grad():
            for k in (1, 5, 16, 31):
                shifted = conv(torch.roll(x, k, dims=-1))
                expected = torch.roll(conv(x), k, dims=-1)
                assert float((shifted - expected).abs().max()) <= 1e-5

    def test_output_spatial_dims_preserved(self):
        conv = EquirectConv2d(3, 4, 7)
        assert conv(torch.zeros(1, 3, 8, 20)).shape == (1, 4, 8, 20)


class TestGenerator:
    @pytest.mark.parametrize("h,w", [(32, 64), (64, 128), (16, 16), (64, 64)])
    def test_output_shape_equals_input(self, h, w):
        g = ResnetGenerator(3, ngf=4)
        assert g(torch.zeros(1, 3, h, w)).shape == (1, 3, h, w)

    def test_four_channel_input(self):
        g = ResnetGenerator(4, ngf=4)
        assert g(torch.zeros(1, 4, 32, 64)).shape == (1, 3, 32, 64)

    def test_first_layer_preactivation_equivariance(self):
        torch.manual_seed(1)
        g = ResnetGenerator(3, ngf=4, equirect=True)
        x = torch.randn(1, 3, 16, 32)
        k = 7
        with torch.no_grad():
            shifted = g.first_preactivation(torch.roll(x, k, dims=-1))
            expected = torch.roll(g.first_preactivation(x), k, dims=-1)
            assert float((shifted - expected).abs().max()) <= 1e-5

    def test_non_equirect_first_layer_not_equivariant(self):
        torch.manual_seed(2)
        g = ResnetGenerator(3, ngf=4, equirect=False)
        x = torch.randn(1, 3, 16, 32)
        with torch.no_grad():
            shifted = g.first_preactivation(torch.roll(x, 7, dims=-1))
            expected = torch.roll(g.first_preactivation(x), 7, dims=-1)
            assert float((shifted - expected).abs().max()) > 1e-3

    def test_encoder_taps_count_and_shapes(self):
        g = ResnetGenerator(3, ngf=4)
        feats = g.encode(torch.zeros(1, 3, 32, 64), (0, 1, 2, 3, 4))
        assert len(feats) == 5
        assert feats[0].shape == (1, 3, 32, 64)  # layer 0 is the raw image
        assert feats[2].shape[-2:] == (16, 32)
        assert feats[3].shape[-2:] == (8, 16)

    def test_nine_residual_blocks(self):
        g = ResnetGenerator(3, ngf=4)
        assert len(g.blocks) == 9

    def test_copy_through_masked_region_zeroes_consistency(self):
        # A generator that copies the masked content exactly gives L_cons = 0;
        # emulate with fake == partial on the mask.
        partial = torch.rand(1, 3, 8, 8) * 2 - 1
        mask = (torch.rand(1, 1, 8, 8) < 0.5).float()
        fake = torch.rand(1, 3, 8, 8) * 2 - 1
        fake = fake * (1 - mask) + partial * mask
        assert float(consistency_loss(fake, partial, mask)) == pytest.approx(0.0, abs=1e-7)


def test_discriminator_is_patchwise():
    d = PatchDiscriminator(3, ndf=4)
    out = d(torch.zeros(1, 3, 64, 128))
    assert out.ndim == 4 and out.shape[1] == 1
    assert out.shape[2] > 1 and out.shape[3] > 1  # a logit map, not a scalar
