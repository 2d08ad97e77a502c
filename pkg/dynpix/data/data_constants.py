IMAGE_SUFFIX = ".png"
MASK_STEM_SUFFIX = "_mask"
MANIFEST_FILE = "manifest.json"
SPLITS_FILE = "splits.json"

# manifest / splits keys
SAMPLES = "samples"
ID = "id"
IMAGE = "image"
MASK = "mask"

# synthetic ellipse rendering, in [0, 1] intensity before mapping to [-1, 1]
ELLIPSE_FOREGROUND_INTENSITY = 0.8
ELLIPSE_BACKGROUND_INTENSITY = 0.2
TEXTURE_BLUR_SIGMA = 2.0
