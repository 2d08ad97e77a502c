import csv
import math
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from core import constants as ccst
from core.exceptions import ConfigurationError
from core.exceptions import NonFiniteLossError
from core.log import get_logger
from core.models.config_models import VAEConfig
from core.models.utility_models import CapacityRow
from core.models.utility_models import CapacityTable
from core.utils import derive_seed
from dynpix.data.preprocessing import binarize_mask
from dynpix.data.preprocessing import resize_grid
from dynpix.evaluation.metrics import binarize
from dynpix.evaluation.metrics import dice
from dynpix.models.init_utils import seeded_build
from dynpix.models.vae import ConvVAE
from dynpix.models.vae import kl_divergence
from dynpix.utils.generic.generic_utils import log_time


logger = get_logger(__name__)


def fit_masks_to_size(masks: list[np.ndarray], size: int) -> torch.Tensor:
    """(N, 1, size, size) float32 tensor of {-1, +1} masks."""
    fitted = [mask if mask.shape[-1] == size else binarize_mask(resize_grid(mask, size)) for mask in masks]
    return torch.from_numpy(np.stack(fitted).astype(np.float32))


def vae_loss(
    logits: torch.Tensor, targets01: torch.Tensor, mu: torch.Tensor, logvar: torch.Tensor, kl_weight: float
) -> tuple[torch.Tensor, torch.Tensor]:
    """(total, reconstruction): per-sample summed pixel BCE, batch-averaged, plus kl_weight * KL."""
    reconstruction = F.binary_cross_entropy_with_logits(logits, targets01, reduction="sum") / logits.shape[0]
    return reconstruction + kl_weight * kl_divergence(mu, logvar), reconstruction


def train_vae(masks: list[np.ndarray], cfg: VAEConfig, seed: int) -> ConvVAE:
    """Fit a ConvVAE to the masks; per-epoch mean losses land in `history` / `reconstruction_history`."""
    if not masks:
        raise ValueError("train_vae needs at least one mask")
    cfg.check()
    data = fit_masks_to_size(masks, cfg.input_size)
    targets01 = (data + 1.0) / 2.0

    vae = seeded_build(lambda: ConvVAE(cfg), derive_seed(seed, "vae_init"))
    optimizer = torch.optim.Adam(vae.parameters(), lr=cfg.lr)
    rng = np.random.default_rng(derive_seed(seed, "vae_order"))

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(derive_seed(seed, "vae_sampling"))
        vae.train()
        for epoch in range(cfg.epochs):
            order = torch.from_numpy(rng.permutation(len(data)))
            total = reconstruction_total = 0.0
            for start in range(0, len(order), cfg.batch_size):
                index = order[start : start + cfg.batch_size]
                logits, mu, logvar = vae(data[index])
                loss, reconstruction = vae_loss(logits, targets01[index], mu, logvar, cfg.kl_weight)
                if not torch.isfinite(loss):
                    raise NonFiniteLossError("vae_loss", float(loss))
                optimizer.zero_grad(set_to_none=True)
                loss.backward()
                optimizer.step()
                total += float(loss) * len(index)
                reconstruction_total += float(reconstruction) * len(index)
            vae.history.append(total / len(data))
            vae.reconstruction_history.append(reconstruction_total / len(data))
            logger.debug(
                f"vae latent={cfg.latent_size} epoch {epoch + 1}: loss={vae.history[-1]:.3f} "
                f"reconstruction={vae.reconstruction_history[-1]:.3f}"
            )
    vae.eval()
    return vae


def reconstruction_dice(vae, masks: list[np.ndarray], threshold: float = ccst.BINARIZE_THRESHOLD) -> float:
    """Mean Dice between each mask and its binarised posterior-mean reconstruction."""
    if not masks:
        return 0.0
    size = vae.cfg.input_size if hasattr(vae, "cfg") else int(masks[0].shape[-1])
    data = fit_masks_to_size(masks, size)
    reconstructions = vae.reconstruct(data).detach().cpu().numpy()
    scores = [dice(binarize(reconstruction, threshold), target) for reconstruction, target in zip(reconstructions, data.numpy())]
    return float(np.mean(scores))


def sweep_latents(
    masks: list[np.ndarray], sizes: list[int], base_cfg: VAEConfig, seed: int
) -> CapacityTable:
    """One VAE per latent size (duplicates dropped); a failing size becomes an error row."""
    if not sizes:
        raise ConfigurationError("sweep_latents needs at least one latent size")
    unique_sizes = list(dict.fromkeys(sizes))
    if len(unique_sizes) != len(sizes):
        logger.warning(f"Duplicate latent sizes in {sizes}; sweeping {unique_sizes}")

    rows = []
    for latent_size in unique_sizes:
        try:
            cfg = VAEConfig.model_validate({**base_cfg.model_dump(), "latent_size": latent_size})
            with log_time(f"vae latent={latent_size}", logger):
                vae = train_vae(masks, cfg, derive_seed(seed, "latent", latent_size))
            score = reconstruction_dice(vae, masks)
            if not math.isfinite(score):
                raise NonFiniteLossError("reconstruction_dice", score)
            rows.append(CapacityRow(latent_size=latent_size, dice=score))
            logger.info(f"latent {latent_size}: reconstruction dice {score:.4f}")
        except Exception as e:
            logger.error(f"Latent size {latent_size} failed: {e}")
            rows.append(CapacityRow(latent_size=latent_size, error=str(e)))
    return CapacityTable(rows=rows)


def export_capacity_table(table: CapacityTable, out_dir: Path | str) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "capacity.csv"
    md_path = out_dir / "capacity.md"

    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["latent_size", "dice", "error"])
        for row in table.rows:
            writer.writerow([row.latent_size, "" if row.dice is None else repr(row.dice), row.error or ""])

    lines = ["| Latent size | Dice |", "|---|---|"]
    for row in table.rows:
        cell = f"{100 * row.dice:.2f}" if row.dice is not None else f"failed: {row.error}"
        lines.append(f"| {row.latent_size} | {cell} |")
    md_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"csv": csv_path, "markdown": md_path}
