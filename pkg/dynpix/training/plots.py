from pathlib import Path

import matplotlib


matplotlib.use("Agg")
from matplotlib import pyplot as plt  # noqa: E402

from core.models.utility_models import LossRecord  # noqa: E402


# Curve mapping: generator L1 (orange), generator adversarial = image + noise terms (blue),
# discriminator image cycle (green), discriminator noise cycle (red).
CURVES = (
    ("generator L1", "orange", lambda r: r.l1),
    ("generator adversarial (image + noise)", "tab:blue", lambda r: r.g_adv_image + r.g_adv_noise),
    ("discriminator, image cycle", "green", lambda r: r.d_image),
    ("discriminator, noise cycle", "red", lambda r: r.d_noise),
)


def epoch_means(records: list[LossRecord]) -> tuple[list[int], dict[str, list[float]]]:
    by_epoch: dict[int, list[LossRecord]] = {}
    for record in records:
        by_epoch.setdefault(record.epoch, []).append(record)
    epochs = sorted(by_epoch)
    means = {
        label: [sum(value(r) for r in by_epoch[epoch]) / len(by_epoch[epoch]) for epoch in epochs]
        for label, _, value in CURVES
    }
    return epochs, means


def plot_training_curves(records: list[LossRecord], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    epochs, means = epoch_means(records)

    fig, ax = plt.subplots(figsize=(8, 5))
    for label, color, _ in CURVES:
        ax.plot(epochs, means[label], label=label, color=color)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
