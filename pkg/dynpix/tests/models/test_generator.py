import unittest

import pytest
import torch

from core.exceptions import ConfigurationError
from core.models.config_models import GeneratorSpec
from core.models.config_models import ParameterGroupName
from core.models.config_models import PathMode
from core.models.config_models import SkipMode
from core.utils import parameter_checksum
from dynpix.models.generator import build_generator
from dynpix.models.generator import group_trainable
from dynpix.models.generator import set_trainable


def _toy_spec(**overrides) -> GeneratorSpec:
    values = dict(input_size=16, base_width=4, max_width=4, depth=2, decoder_dropout=0.0)
    values.update(overrides)
    return GeneratorSpec(**values)


class TestBuildGenerator(unittest.TestCase):
    def test_encoder_sizes_and_determinism(self):
        spec = GeneratorSpec(input_size=64, base_width=8, max_width=32, depth=3)
        first = build_generator(spec, seed=0)
        second = build_generator(spec, seed=0)

        self.assertEqual(spec.encoder_sizes(), [32, 16, 8])
        features = first.encode(torch.zeros(1, 1, 64, 64))
        self.assertEqual([f.shape[-1] for f in features], [32, 16, 8])
        self.assertEqual(
            sum(p.numel() for p in first.parameters()), sum(p.numel() for p in second.parameters())
        )
        self.assertEqual(parameter_checksum(first.parameters()), parameter_checksum(second.parameters()))

    def test_different_seeds_differ(self):
        spec = _toy_spec()
        self.assertNotEqual(
            parameter_checksum(build_generator(spec, 0).parameters()),
            parameter_checksum(build_generator(spec, 1).parameters()),
        )

    def test_build_leaves_global_rng_untouched(self):
        torch.manual_seed(3)
        expected = torch.rand(4)
        torch.manual_seed(3)
        build_generator(_toy_spec(), seed=99)
        self.assertTrue(torch.equal(torch.rand(4), expected))

    def test_indivisible_size_is_rejected(self):
        with self.assertRaises(ConfigurationError):
            build_generator(GeneratorSpec(input_size=100, depth=3), seed=0)

    def test_every_parameter_is_in_exactly_one_group(self):
        generator = build_generator(GeneratorSpec(input_size=32, base_width=8, max_width=32, depth=3), seed=0)
        grouped = [id(p) for params in generator.parameter_groups().values() for p in params]
        self.assertEqual(len(grouped), len(set(grouped)))
        self.assertEqual(set(grouped), {id(p) for p in generator.parameters()})


class TestForward(unittest.TestCase):
    def setUp(self):
        self.spec = GeneratorSpec(input_size=32, base_width=8, max_width=32, depth=3)
        self.generator = build_generator(self.spec, seed=1).eval()

    def test_output_shape_and_range_on_both_paths(self):
        torch.manual_seed(0)
        x = torch.rand(16, 1, 32, 32) * 6 - 3
        for mode in (PathMode.IMAGE, PathMode.NOISE):
            with torch.no_grad():
                out = self.generator(x, mode)
            self.assertEqual(out.shape, (16, 1, 32, 32))
            self.assertGreaterEqual(float(out.min()), -1.0)
            self.assertLessEqual(float(out.max()), 1.0)

    def test_inference_is_bitwise_repeatable(self):
        x = torch.rand(2, 1, 32, 32) * 2 - 1
        with torch.no_grad():
            self.assertTrue(torch.equal(self.generator.forward_image(x), self.generator.forward_image(x)))
            self.assertTrue(torch.equal(self.generator.forward_noise(x), self.generator.forward_noise(x)))

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            self.generator.forward_image(torch.zeros(1, 1, 16, 16))
        with self.assertRaises(ValueError):
            self.generator.forward_noise(torch.zeros(1, 2, 32, 32))

    def test_noise_code_shape(self):
        with torch.no_grad():
            deepest = self.generator.encode(torch.rand(3, 1, 32, 32))[-1]
            code = self.generator.noise_code(deepest)
        self.assertEqual(tuple(code.shape[1:]), (1, 4, 4))

    def test_zeroed_decoder_gives_zero_output(self):
        with torch.no_grad():
            for parameter in self.generator.decoder.parameters():
                parameter.zero_()
            for parameter in self.generator.bottleneck.parameters():
                parameter.zero_()
            x = torch.rand(2, 1, 32, 32) * 2 - 1
            self.assertTrue(torch.equal(self.generator.forward_noise(x), torch.zeros(2, 1, 32, 32)))
            self.assertTrue(torch.equal(self.generator.forward_image(x), torch.zeros(2, 1, 32, 32)))

    def test_noise_path_ignores_encoder_skip_features(self):
        x = torch.rand(2, 1, 32, 32) * 2 - 1
        with torch.no_grad():
            features = self.generator.encode(x)
            code = self.generator.noise_code(features[-1])
            perturbed = [torch.randn_like(f) * 5 for f in features[:-1]]
            self.assertTrue(
                torch.equal(self.generator.decode_noise(code, features[:-1]), self.generator.decode_noise(code, perturbed))
            )
            self.assertTrue(torch.equal(self.generator.forward_noise(x), self.generator.decode_noise(code, perturbed)))

    def test_live_skip_mode_consumes_encoder_features(self):
        generator = build_generator(self.spec.model_copy(update={"skip_mode_noise_path": SkipMode.LIVE}), 1).eval()
        x = torch.rand(2, 1, 32, 32) * 2 - 1
        with torch.no_grad():
            features = generator.encode(x)
            code = generator.noise_code(features[-1])
            perturbed = [torch.randn_like(f) for f in features[:-1]]
            self.assertFalse(torch.equal(generator.decode_noise(code, features[:-1]), generator.decode_noise(code, perturbed)))

    def test_paths_share_decoder_weights(self):
        x = torch.rand(1, 1, 32, 32) * 2 - 1
        with torch.no_grad():
            image_before = self.generator.forward_image(x)
            noise_before = self.generator.forward_noise(x)
            self.generator.decoder[-1][0].weight.add_(0.5)
            self.assertFalse(torch.equal(image_before, self.generator.forward_image(x)))
            self.assertFalse(torch.equal(noise_before, self.generator.forward_noise(x)))


class TestGradientRouting(unittest.TestCase):
    def setUp(self):
        self.generator = build_generator(_toy_spec(), seed=2).double().eval()
        generator = torch.Generator().manual_seed(0)
        self.x = (torch.rand(1, 1, 16, 16, generator=generator, dtype=torch.float64) * 2 - 1)
        self.weights = torch.rand(1, 1, 16, 16, generator=generator, dtype=torch.float64)

    def _loss(self, mode: PathMode) -> torch.Tensor:
        return (self.generator(self.x, mode) * self.weights).sum()

    def test_noise_path_gives_encoder_no_gradient(self):
        self._loss(PathMode.NOISE).backward()
        groups = self.generator.parameter_groups()

        for parameter in groups[ParameterGroupName.ENCODER]:
            self.assertTrue(parameter.grad is None or torch.count_nonzero(parameter.grad) == 0)
        self.assertGreater(sum(float(p.grad.abs().sum()) for p in groups[ParameterGroupName.DECODER]), 0.0)
        self.assertGreater(sum(float(p.grad.abs().sum()) for p in groups[ParameterGroupName.NOISE_BOTTLENECK]), 0.0)
        for parameter in groups[ParameterGroupName.BOTTLENECK]:
            self.assertIsNone(parameter.grad)

    def test_image_path_reaches_encoder(self):
        self._loss(PathMode.IMAGE).backward()
        groups = self.generator.parameter_groups()
        for group in (ParameterGroupName.ENCODER, ParameterGroupName.BOTTLENECK, ParameterGroupName.DECODER):
            self.assertGreater(sum(float(p.grad.abs().sum()) for p in groups[group] if p.grad is not None), 0.0)

    def test_encoder_gradient_flows_when_the_stop_is_off(self):
        self.generator = build_generator(_toy_spec(stop_encoder_gradient_on_noise_path=False), seed=2).double().eval()
        self._loss(PathMode.NOISE).backward()
        encoder = self.generator.parameter_groups()[ParameterGroupName.ENCODER]
        self.assertGreater(sum(float(p.grad.abs().sum()) for p in encoder if p.grad is not None), 0.0)

    def test_noise_path_gradients_match_finite_differences(self):
        self._loss(PathMode.NOISE).backward()
        targets = [self.generator.noise_bottleneck[0].weight, self.generator.decoder[-1][0].weight]
        eps = 1e-6
        checked = 0
        for parameter in targets:
            flat = parameter.data.view(-1)
            analytic = parameter.grad.view(-1)
            for index in range(0, flat.numel(), max(1, flat.numel() // 6)):
                original = float(flat[index])
                with torch.no_grad():
                    flat[index] = original + eps
                    plus = float(self._loss(PathMode.NOISE))
                    flat[index] = original - eps
                    minus = float(self._loss(PathMode.NOISE))
                    flat[index] = original
                numeric = (plus - minus) / (2 * eps)
                if abs(numeric) < 1e-8:
                    continue
                checked += 1
                assert abs(numeric - float(analytic[index])) / abs(numeric) < 1e-3
        self.assertGreater(checked, 0)


class TestSetTrainable(unittest.TestCase):
    def test_toggle_and_query(self):
        generator = build_generator(_toy_spec(), seed=0)
        set_trainable(generator, ParameterGroupName.ENCODER, False)
        self.assertFalse(group_trainable(generator, ParameterGroupName.ENCODER))
        self.assertTrue(group_trainable(generator, ParameterGroupName.DECODER))
        set_trainable(generator, "encoder", True)
        self.assertTrue(group_trainable(generator, ParameterGroupName.ENCODER))

    def test_unknown_group(self):
        generator = build_generator(_toy_spec(), seed=0)
        with self.assertRaises(ConfigurationError):
            set_trainable(generator, "unknown", False)
        with self.assertRaises(ConfigurationError):
            set_trainable(generator, ParameterGroupName.DISCRIMINATOR, False)


def test_default_spec_output_shape():
    generator = build_generator(GeneratorSpec(), seed=0).eval()
    with torch.no_grad():
        image_out = generator.forward_image(torch.zeros(1, 1, 256, 256))
        noise_out = generator.forward_noise(torch.rand(1, 1, 256, 256) * 2 - 1)
        code = generator.noise_code(generator.encode(torch.zeros(1, 1, 256, 256))[-1])
    assert image_out.shape == (1, 1, 256, 256)
    assert noise_out.shape == (1, 1, 256, 256)
    assert tuple(code.shape) == (1, 1, 4, 4)


@pytest.mark.parametrize("depth", [1, 2, 4])
def test_depths_build_and_run(depth):
    spec = GeneratorSpec(input_size=64, base_width=4, max_width=16, depth=depth)
    generator = build_generator(spec, seed=0).eval()
    with torch.no_grad():
        assert generator.forward_noise(torch.rand(1, 1, 64, 64)).shape == (1, 1, 64, 64)
