"""Analytic gradients versus central finite differences on tiny models."""

import numpy as np
import pytest
import torch

from rfhybrid.config import tiny_config
from rfhybrid.losses import LossWeights, total_loss
from rfhybrid.net import HybridModel

REL_TOL = 1e-4


def make_case(task, demod_classes=0):
    torch.manual_seed(11)
    cfg = tiny_config(task, demod_classes=demod_classes)
    model = HybridModel(cfg).double()
    model.eval()  # frozen batch-norm stats, dropout off: a deterministic map
    batch = 4
    rx = torch.randn(batch, 2, cfg.frame_length, dtype=torch.float64)
    tx = torch.randn(batch, 2, cfg.frame_length, dtype=torch.float64)
    if task == "amc":
        labels = torch.randint(0, 13, (batch,))
        weights = LossWeights(0.7, (1.3,))
    elif task == "regression":
        labels = torch.randn(batch, 4, dtype=torch.float64)
        weights = LossWeights(0.7, (1.0, 0.9, 0.8, 0.7))
    else:
        labels = torch.randint(0, demod_classes, (batch, cfg.n_symbols))
        weights = LossWeights(0.7, (1.3,))

    def loss_fn():
        tx_hat, logits = model(rx)
        loss, _ = total_loss(task, tx, tx_hat, logits, labels, weights)
        return loss

    return model, loss_fn


def sampled_components(model):
    return {
        "encoder": list(model.encoder.parameters()),
        "decoder": list(model.decoder.parameters()),
        "attention": list(model.classifier.stack.parameters()),
        "head": list(model.classifier.fc.parameters()),
    }


def check_component(model, loss_fn, params, n_samples, rng, max_attempts=40):
    loss = loss_fn()
    model.zero_grad()
    loss.backward()
    # central differences lose ~|loss|*eps to cancellation; a 1e-4 relative
    # comparison is only meaningful for gradients comfortably above that
    floor = max(1e-9, abs(float(loss)) * 1e-5)
    checked = 0
    for _ in range(max_attempts):
        if checked >= n_samples:
            break
        p = params[rng.integers(len(params))]
        if p.grad is None:
            continue
        flat = p.detach().reshape(-1)
        grads = p.grad.reshape(-1)
        i = int(rng.integers(len(flat)))
        analytic = float(grads[i])
        h = 1e-6 * max(1.0, abs(float(flat[i])))
        with torch.no_grad():
            original = float(flat[i])
            flat[i] = original + h
            plus = float(loss_fn())
            flat[i] = original - h
            minus = float(loss_fn())
            flat[i] = original
        fd = (plus - minus) / (2 * h)
        scale = max(abs(analytic), abs(fd))
        if scale < floor:
            continue  # dead unit or below finite-difference precision
        rel = abs(analytic - fd) / scale
        assert rel < REL_TOL, f"grad mismatch: analytic {analytic}, fd {fd}, rel {rel}"
        checked += 1
    return checked


@pytest.mark.parametrize("task,k", [("amc", 0), ("regression", 0), ("demod", 4)])
def test_total_loss_gradients(task, k):
    model, loss_fn = make_case(task, demod_classes=k)
    rng = np.random.default_rng(7)
    total_checked = 0
    for name, params in sampled_components(model).items():
        checked = check_component(model, loss_fn, params, n_samples=6, rng=rng)
        assert checked >= 4, f"too few checkable gradients in {name}"
        total_checked += checked
    assert total_checked >= 20
