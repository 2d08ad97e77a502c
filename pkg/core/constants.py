# Optimisation
INITIAL_LEARNING_RATE = 2e-4
ADAM_BETAS = (0.5, 0.999)
L1_WEIGHT_ALPHA = 10.0
ADVERSARIAL_WEIGHT_BETA = 1.0
DEFAULT_BATCH_SIZE = 1

# Schedules reported for the two in-domain datasets
HC18_TOTAL_EPOCHS = 200
HC18_CONSTANT_EPOCHS = 100
MONTGOMERY_TOTAL_EPOCHS = 50
MONTGOMERY_CONSTANT_EPOCHS = 30

# Preprocessing
RESIZE_TO = 288
CROP_TO = 256
TRAIN_FRACTION = 0.7
VAL_FRACTION = 0.1
TEST_FRACTION = 0.2

# Noise path
NOISE_GRID = 4
NOISE_LOW = -1.0
NOISE_HIGH = 1.0
NOISE_CODE_SHAPE = (1, 4, 4)

# Masks are encoded in {-1, +1}; 0 is the midpoint used for every binarisation
MASK_FOREGROUND = 1.0
MASK_BACKGROUND = -1.0
BINARIZE_THRESHOLD = 0.0

PROBABILITY_FLOOR = 1e-7

# VAE capacity sweep
VAE_LATENT_SIZES = (2, 3, 4, 8, 16, 32)

# Environment
OUTPUT_ROOT_ENV_VAR = "DYNPIX_OUTPUT_ROOT"
