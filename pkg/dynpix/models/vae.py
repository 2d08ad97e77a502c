import torch
import torch.nn as nn

from core.models.config_models import VAEConfig


class ConvVAE(nn.Module):
    """Convolutional VAE over 1-channel masks in {-1, +1}; the decoder emits per-pixel logits."""

    def __init__(self, cfg: VAEConfig):
        super().__init__()
        cfg.check()
        self.cfg = cfg
        widths = [cfg.base_width * 2**i for i in range(cfg.depth)]
        self.feature_size = cfg.input_size // 2**cfg.depth
        flat = widths[-1] * self.feature_size**2

        encoder: list[nn.Module] = []
        for i, width in enumerate(widths):
            encoder += [nn.Conv2d(1 if i == 0 else widths[i - 1], width, 4, stride=2, padding=1), nn.LeakyReLU(0.2)]
        self.encoder = nn.Sequential(*encoder, nn.Flatten())
        self.fc_mu = nn.Linear(flat, cfg.latent_size)
        self.fc_logvar = nn.Linear(flat, cfg.latent_size)

        self.fc_decode = nn.Linear(cfg.latent_size, flat)
        decoder: list[nn.Module] = []
        for i in range(cfg.depth - 1, 0, -1):
            decoder += [nn.ConvTranspose2d(widths[i], widths[i - 1], 4, stride=2, padding=1), nn.ReLU()]
        decoder.append(nn.ConvTranspose2d(widths[0], 1, 4, stride=2, padding=1))
        self.decoder = nn.Sequential(*decoder)
        self._widths = widths

        self.history: list[float] = []
        self.reconstruction_history: list[float] = []

    def encode(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.encoder(x)
        return self.fc_mu(h), self.fc_logvar(h)

    def reparameterize(self, mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
        std = torch.exp(0.5 * logvar)
        return mu + torch.randn_like(std) * std

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        h = self.fc_decode(z).view(-1, self._widths[-1], self.feature_size, self.feature_size)
        return self.decoder(h)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        mu, logvar = self.encode(x)
        return self.decode(self.reparameterize(mu, logvar)), mu, logvar

    @torch.no_grad()
    def reconstruct(self, masks: torch.Tensor) -> torch.Tensor:
        """Posterior-mean reconstruction mapped back to [-1, 1]."""
        mu, _ = self.encode(masks)
        return 2.0 * torch.sigmoid(self.decode(mu)) - 1.0


def kl_divergence(mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """KL(N(mu, exp(logvar)) || N(0, I)) summed over latents, averaged over the batch."""
    return (-0.5 * torch.sum(1 + logvar - mu.pow(2) - logvar.exp(), dim=1)).mean()
