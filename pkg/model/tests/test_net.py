import numpy as np
import pytest
import torch

from rfhybrid.config import ModelConfig, tiny_config
from rfhybrid.net import HybridModel


def full_config(task, frame_length, demod_classes=0):
    return ModelConfig(frame_length=frame_length, task=task, demod_classes=demod_classes)


class TestShapes:
    @pytest.mark.parametrize("frame_length", [512, 1024])
    def test_latent_shape(self, frame_length):
        cfg = full_config("amc", frame_length)
        model = HybridModel(cfg)
        model.eval()
        with torch.no_grad():
            z = model.encode(torch.randn(2, 2, frame_length))
        assert tuple(z.shape) == (2, 256, frame_length // 4)

    def test_decode_restores_shape(self):
        cfg = full_config("amc", 512)
        model = HybridModel(cfg)
        model.eval()
        with torch.no_grad():
            tx_hat, _ = model(torch.randn(3, 2, 512))
        assert tuple(tx_hat.shape) == (3, 2, 512)

    def test_amc_head(self):
        model = HybridModel(full_config("amc", 512))
        model.eval()
        with torch.no_grad():
            _, logits = model(torch.randn(2, 2, 512))
        assert tuple(logits.shape) == (2, 13)

    def test_regression_head(self):
        model = HybridModel(full_config("regression", 512))
        model.eval()
        with torch.no_grad():
            _, logits = model(torch.randn(2, 2, 512))
        assert tuple(logits.shape) == (2, 4)

    def test_symbol_count_head(self):
        model = HybridModel(full_config("symbol_count", 512))
        model.eval()
        with torch.no_grad():
            _, logits = model(torch.randn(2, 2, 512))
        assert tuple(logits.shape) == (2, 17)

    def test_demod_head_qpsk(self):
        model = HybridModel(full_config("demod", 1024, demod_classes=4))
        model.eval()
        with torch.no_grad():
            _, logits = model(torch.randn(2, 2, 1024))
        assert tuple(logits.shape) == (2, 256, 4)

    def test_rejects_wrong_length(self):
        model = HybridModel(full_config("amc", 512))
        with pytest.raises(ValueError, match="512"):
            model(torch.randn(2, 2, 520))

    def test_rejects_odd_frame_length(self):
        with pytest.raises(ValueError):
            full_config("amc", 510)


class TestBehavior:
    def test_zero_input_finite(self):
        model = HybridModel(tiny_config("amc"))
        model.eval()
        with torch.no_grad():
            tx_hat, logits = model(torch.zeros(1, 2, 32))
        assert torch.isfinite(tx_hat).all()
        assert torch.isfinite(logits).all()

    def test_eval_mode_deterministic(self):
        model = HybridModel(full_config("amc", 512))
        model.eval()
        rx = torch.randn(2, 2, 512)
        with torch.no_grad():
            a_tx, a_logits = model(rx)
            b_tx, b_logits = model(rx)
        assert torch.equal(a_tx, b_tx)
        assert torch.equal(a_logits, b_logits)

    def test_train_mode_dropout_is_stochastic(self):
        model = HybridModel(full_config("amc", 512))
        model.train()
        rx = torch.randn(4, 2, 512)
        _, a = model(rx)
        _, b = model(rx)
        assert not torch.equal(a, b)

    def test_batch_independence_in_eval(self):
        torch.manual_seed(3)
        model = HybridModel(full_config("amc", 512))
        model.eval()
        rx = torch.randn(4, 2, 512)
        with torch.no_grad():
            _, small = model(rx[:2])
            _, big = model(rx)
        assert torch.allclose(small, big[:2], atol=1e-5)

    def test_lsh_toggle_matches_shapes(self):
        torch.manual_seed(4)
        exact = HybridModel(full_config("amc", 512))
        cfg = ModelConfig(frame_length=512, task="amc", lsh_attention=True)
        bucketed = HybridModel(cfg)
        bucketed.eval(), exact.eval()
        rx = torch.randn(2, 2, 512)
        with torch.no_grad():
            _, a = exact(rx)
            _, b = bucketed(rx)
        assert a.shape == b.shape
        assert torch.isfinite(b).all()

    def test_overfit_fixed_batch(self):
        # full-size model memorizes 8 examples: classifier loss < 0.01
        torch.manual_seed(5)
        from rfhybrid.losses import LossWeights, total_loss

        model = HybridModel(full_config("amc", 512))
        model.train()
        rx = torch.randn(8, 2, 512)
        tx = torch.randn(8, 2, 512)
        labels = torch.arange(8) % 13
        opt = torch.optim.Adam(model.parameters(), lr=1e-3)
        weights = LossWeights(0.001, (1.0,))
        final = None
        for step in range(500):
            opt.zero_grad()
            tx_hat, logits = model(rx)
            loss, breakdown = total_loss("amc", tx, tx_hat, logits, labels, weights)
            loss.backward()
            opt.step()
            final = breakdown["classifier_0"]
            if final < 0.01:
                break
        assert final < 0.01, f"classifier loss stuck at {final}"
