"""Image quality metrics and training-style objectives.

PSNR and SSIM operate on unit-interval images; the three loss functions
score a Retinex decomposition, a restored reflectance, and an adjusted
illumination map against references. All norms are means rather than
sums so values are comparable across image sizes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ParameterError, SizeError
from .validation import check_color, check_image, check_plane, check_same_shape


@dataclass(frozen=True)
class SsimParams:
    """Constants for the structural similarity index.

    Defaults are the reference-standard choices: an 11x11 Gaussian window
    with sigma 1.5, k1=0.01, k2=0.03, and a dynamic range of 1.0 for
    unit-interval images.
    """

    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ParameterError(f"window_size must be odd and positive, got {self.window_size}")
        if self.sigma <= 0 or self.k1 <= 0 or self.k2 <= 0 or self.dynamic_range <= 0:
            raise ParameterError("sigma, k1, k2 and dynamic_range must all be positive")

    def window(self) -> np.ndarray:
        """1-D Gaussian window, positive weights summing to one."""
        half = self.window_size // 2
        x = np.arange(-half, half + 1, dtype=np.float64)
        w = np.exp(-(x * x) / (2.0 * self.sigma * self.sigma))
        return w / w.sum()


DEFAULT_SSIM = SsimParams()


def mse(a, b) -> float:
    a = check_image(a, "a")
    b = check_image(b, "b")
    check_same_shape(a, b, "a", "b")
    d = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(d * d))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB with MAX = 1.

    Identical images give ``float('inf')``; reports serialize that as the
    string ``"inf"``.
    """
    err = mse(a, b)
    if err == 0.0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / err))


def ssim(a, b, params: SsimParams = DEFAULT_SSIM) -> float:
    """Mean SSIM over valid window positions, averaged over channels.

    Symmetric in its arguments and 1.0 for identical images; the k1/k2
    stabilizers keep constant patches well defined.
    """
    a = check_image(a, "a")
    b = check_image(b, "b")
    check_same_shape(a, b, "a", "b")
    if min(a.shape[0], a.shape[1]) < params.window_size:
        raise SizeError(
            f"image {a.shape[:2]} smaller than the {params.window_size}x"
            f"{params.window_size} SSIM window"
        )
    if a.ndim == 2:
        return _ssim_plane(a, b, params)
    vals = [_ssim_plane(a[:, :, c], b[:, :, c], params) for c in range(a.shape[2])]
    return float(np.mean(vals))


def _ssim_plane(x, y, params: SsimParams) -> float:
    x = x.astype(np.float64)
    y = y.astype(np.float64)
    w = params.window()
    half = params.window_size // 2

    def win(img):
        out = correlate1d(img, w, axis=0, mode="constant")
        out = correlate1d(out, w, axis=1, mode="constant")
        return out[half:-half, half:-half]  # fully supported windows only

    mu_x = win(x)
    mu_y = win(y)
    var_x = win(x * x) - mu_x * mu_x
    var_y = win(y * y) - mu_y * mu_y
    cov = win(x * y) - mu_x * mu_y

    L = params.dynamic_range
    c1 = (params.k1 * L) ** 2
    c2 = (params.k2 * L) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def gradient(img):
    """Forward-difference gradients (gx, gy) with a replicated border.

    The replicated border makes the last column of gx and the last row of
    gy identically zero.
    """
    arr = check_image(img, "img").astype(np.float64)
    gx = np.zeros_like(arr)
    gy = np.zeros_like(arr)
    gx[:, :-1] = arr[:, 1:] - arr[:, :-1]
    gy[:-1, :] = arr[1:, :] - arr[:-1, :]
    return gx.astype(np.float32), gy.astype(np.float32)


def _gradient_mse(a, b) -> float:
    gxa, gya = gradient(a)
    gxb, gyb = gradient(b)
    da = np.stack([gxa, gya]).astype(np.float64)
    db = np.stack([gxb, gyb]).astype(np.float64)
    return float(np.mean((da - db) ** 2))


def loss_decom(r_low, r_high, i_low, i_high, s_low, s_high) -> float:
    """Decomposition objective: reflectance similarity + recomposition error.

    Mean absolute difference between the two reflectances, plus the mean
    absolute error of reflectance*illumination against the source image,
    summed over the low and high pair. Zero exactly at a perfect
    decomposition.
    """
    r_low = check_color(r_low, "r_low")
    r_high = check_color(r_high, "r_high")
    i_low = check_plane(i_low, "i_low")
    i_high = check_plane(i_high, "i_high")
    s_low = check_color(s_low, "s_low")
    s_high = check_color(s_high, "s_high")
    check_same_shape(r_low, r_high, "r_low", "r_high")
    check_same_shape(s_low, s_high, "s_low", "s_high")
    check_same_shape(r_low, s_low, "r_low", "s_low")
    check_same_shape(i_low, i_high, "i_low", "i_high")
    check_same_shape(i_low, r_low[:, :, 0], "i_low", "r_low plane")

    total = float(np.mean(np.abs(r_low.astype(np.float64) - r_high.astype(np.float64))))
    for r, i, s in ((r_low, i_low, s_low), (r_high, i_high, s_high)):
        recon = r.astype(np.float64) * i.astype(np.float64)[:, :, None]
        total += float(np.mean(np.abs(recon - s.astype(np.float64))))
    return total


def loss_restore(r_hat, r_high, params: SsimParams = DEFAULT_SSIM) -> float:
    """Restoration objective: MSE - SSIM + gradient MSE.

    Minimized at -1 when the restored reflectance equals the reference.
    """
    r_hat = check_color(r_hat, "r_hat")
    r_high = check_color(r_high, "r_high")
    check_same_shape(r_hat, r_high, "r_hat", "r_high")
    return mse(r_hat, r_high) - ssim(r_hat, r_high, params) + _gradient_mse(r_hat, r_high)


def loss_illum(i_hat, i_high) -> float:
    """Illumination objective: MSE + gradient MSE; zero at the reference."""
    i_hat = check_plane(i_hat, "i_hat")
    i_high = check_plane(i_high, "i_high")
    check_same_shape(i_hat, i_high, "i_hat", "i_high")
    return mse(i_hat, i_high) + _gradient_mse(i_hat, i_high)
