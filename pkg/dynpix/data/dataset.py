import numpy as np
import torch
from torch.utils.data import DataLoader
from torch.utils.data import Dataset

from core.models.utility_models import SamplePair
from core.utils import derive_seed
from dynpix.data.preprocessing import preprocess


class PairDataset(Dataset):
    """
    Preprocessed (image, mask) tensors for one split.

    Training crops depend only on (seed, epoch, sample id), so the delivered batches do not
    change with the number of loader workers.
    """

    def __init__(self, samples: list[SamplePair], resize_to: int, crop_to: int, training: bool, seed: int):
        self.samples = samples
        self.resize_to = resize_to
        self.crop_to = crop_to
        self.training = training
        self.seed = seed
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, index: int) -> tuple[torch.Tensor, torch.Tensor]:
        sample = self.samples[index]
        processed = preprocess(
            sample,
            resize_to=self.resize_to,
            crop_to=self.crop_to,
            training=self.training,
            seed=derive_seed(self.seed, "crop", self.epoch, sample.id),
        )
        return torch.from_numpy(processed.image), torch.from_numpy(processed.mask)


def epoch_order(n: int, seed: int, epoch: int) -> list[int]:
    return [int(i) for i in np.random.default_rng(derive_seed(seed, "order", epoch)).permutation(n)]


def make_loader(dataset: PairDataset, batch_size: int, seed: int, epoch: int, num_workers: int = 0) -> DataLoader:
    dataset.set_epoch(epoch)
    return DataLoader(
        dataset,
        batch_size=batch_size,
        sampler=epoch_order(len(dataset), seed, epoch),
        num_workers=num_workers,
        drop_last=False,
        generator=torch.Generator().manual_seed(derive_seed(seed, "loader", epoch)),
    )


def collate_samples(samples: list[SamplePair]) -> tuple[torch.Tensor, torch.Tensor]:
    images = torch.from_numpy(np.stack([sample.image for sample in samples]))
    masks = torch.from_numpy(np.stack([sample.mask for sample in samples]))
    return images, masks
