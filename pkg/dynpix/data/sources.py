from core.log import get_logger
from core.models.run_models import DataSourceConfig
from core.models.utility_models import SamplePair
from dynpix.data.loading import load_dataset
from dynpix.data.synthetic import synthesize_ellipse_dataset


logger = get_logger(__name__)


def load_samples(source: DataSourceConfig) -> list[SamplePair]:
    """PNG pairs from `data_dir` when given, otherwise the configured synthetic ellipse set."""
    if source.data_dir is not None:
        return load_dataset(source.data_dir, source.manifest, num_workers=source.num_workers)
    synthetic = source.synthetic
    logger.info(f"No data_dir given; synthesizing {synthetic.n} ellipse pairs at {synthetic.size}px")
    return synthesize_ellipse_dataset(synthetic.n, synthetic.size, synthetic.noise_level, synthetic.seed)
