import numpy as np

from ..errors import ContractError


def encode_labels(y, n_classes=5) -> np.ndarray:
    """Labels (``Label`` members or ints) as an int array, range-checked."""
    arr = np.fromiter((int(v) for v in y), dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
        raise ContractError(f"labels must lie in [0, {n_classes})")
    return arr
