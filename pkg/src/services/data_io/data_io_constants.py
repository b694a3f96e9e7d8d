"""
Dataset Format Constants
========================

Binary layout constants of the IDX and CIFAR-10 formats.
"""

# IDX: big-endian uint32 magic, then one uint32 per dimension
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
IDX_IMAGES_HEADER_BYTES = 16
IDX_LABELS_HEADER_BYTES = 8

# CIFAR-10 binary: 1 label byte + 3×32×32 channel-major pixel bytes per record
CIFAR_CHANNELS = 3
CIFAR_SIDE = 32
CIFAR_RECORD_BYTES = 1 + CIFAR_CHANNELS * CIFAR_SIDE * CIFAR_SIDE
CIFAR_NUM_CLASSES = 10

# divisor, not a reciprocal factor: byte 255 must decode to exactly 1.0
PIXEL_MAX = 255.0

FMNIST_CLASS_NAMES = [
    "T-shirt/top",
    "Trouser",
    "Pullover",
    "Dress",
    "Coat",
    "Sandal",
    "Shirt",
    "Sneaker",
    "Bag",
    "Ankle boot",
]

CIFAR_CLASS_NAMES = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
]
