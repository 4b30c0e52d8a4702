"""Lossless interchange between float images and 8-bit PNG / binary PPM / PGM.

Decoded samples map v -> v/255 into the unit interval; encoding rounds half
away from zero back to 8 bits. Only the deterministic subset is supported:
8-bit depth, gray or RGB, no palette, no alpha, no interlacing.
"""

import io
import struct
import zlib

import numpy as np
from PIL import Image as _PILImage

from .errors import DecodeError, RangeError, ShapeError, UnsupportedFormatError
from .validation import check_image

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

#: PNG color types decodable by this module -> channel count
_PNG_COLOR_TYPES = {0: 1, 2: 3}


def decode_image(data: bytes) -> np.ndarray:
    """Decode a PNG, PPM (P6) or PGM (P5) byte stream.

    Returns a float32 array, (H, W) for grayscale or (H, W, 3) for color,
    with every 8-bit sample v mapped to v/255.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("decode_image expects a bytes-like object")
    data = bytes(data)
    if data.startswith(_PNG_SIGNATURE):
        return _decode_png(data)
    if data[:2] in (b"P5", b"P6"):
        return _decode_pnm(data)
    raise DecodeError("unrecognized image signature", offset=0)


def encode_image(img: np.ndarray, format: str = "png8") -> bytes:
    """Encode a unit-interval image to bytes.

    ``format`` is ``"png8"`` or ``"ppm"`` (binary; P5 for one channel,
    P6 for three). Samples are round(clamp(v, 0, 1) * 255) with halves
    rounded away from zero; the byte stream is deterministic.
    """
    arr = check_image(img)
    channels = 1 if arr.ndim == 2 else arr.shape[2]
    if channels not in (1, 3):
        raise ShapeError(f"invalid image: expected 1 or 3 channels, got {channels}")
    if not np.all(np.isfinite(arr)):
        raise RangeError("invalid image: non-finite sample values")
    samples = quantize_u8(arr)
    if format == "png8":
        mode = "L" if channels == 1 else "RGB"
        pil = _PILImage.fromarray(samples, mode=mode)
        buf = io.BytesIO()
        pil.save(buf, format="PNG")
        return buf.getvalue()
    if format == "ppm":
        h, w = samples.shape[:2]
        magic = b"P5" if channels == 1 else b"P6"
        header = magic + b"\n%d %d\n255\n" % (w, h)
        return header + samples.tobytes()
    raise ValueError(f"unknown format {format!r}, expected 'png8' or 'ppm'")


def quantize_u8(arr: np.ndarray) -> np.ndarray:
    """Map unit-interval floats to uint8, rounding half away from zero."""
    clamped = np.clip(arr.astype(np.float64), 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def split_channels(img: np.ndarray) -> list[np.ndarray]:
    """Split a color image into three single-channel planes."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeError(f"split_channels expects (H, W, 3), got {arr.shape}")
    arr = arr.astype(np.float32, copy=False)
    return [np.ascontiguousarray(arr[:, :, c]) for c in range(3)]


def merge_channels(planes) -> np.ndarray:
    """Merge three equally sized planes back into a color image.

    Exact inverse of :func:`split_channels`.
    """
    if len(planes) != 3:
        raise ShapeError(f"merge_channels expects 3 planes, got {len(planes)}")
    arrs = [np.asarray(p, dtype=np.float32) for p in planes]
    for i, p in enumerate(arrs[1:], start=1):
        if p.shape != arrs[0].shape or p.ndim != 2:
            raise ShapeError(
                f"merge_channels: plane {i} has shape {p.shape}, expected {arrs[0].shape}"
            )
    if arrs[0].ndim != 2:
        raise ShapeError(f"merge_channels expects 2-D planes, got {arrs[0].shape}")
    return np.ascontiguousarray(np.stack(arrs, axis=2))


def read_image(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def write_image(path, img) -> None:
    path = str(path)
    if path.lower().endswith((".ppm", ".pgm")):
        fmt = "ppm"
    elif path.lower().endswith(".png"):
        fmt = "png8"
    else:
        raise ValueError(f"cannot infer format from {path!r} (use .png, .ppm or .pgm)")
    data = encode_image(img, fmt)
    with open(path, "wb") as fh:
        fh.write(data)


# -- PNG -----------------------------------------------------------------

def _decode_png(data: bytes) -> np.ndarray:
    _validate_png_structure(data)
    try:
        pil = _PILImage.open(io.BytesIO(data))
        pil.load()
    except Exception as exc:  # corrupt IDAT stream etc.
        raise DecodeError(f"PNG payload failed to decode: {exc}") from exc
    arr = np.asarray(pil)
    if arr.ndim == 2:
        return (arr.astype(np.float32) / 255.0).copy()
    return (arr[:, :, :3].astype(np.float32) / 255.0).copy()


def _validate_png_structure(data: bytes) -> None:
    """Walk the chunk stream: verify lengths, CRCs and the IHDR subset."""
    pos = len(_PNG_SIGNATURE)
    saw_ihdr = False
    saw_iend = False
    while pos < len(data):
        if pos + 8 > len(data):
            raise DecodeError("truncated PNG chunk header", offset=pos)
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        ctype = data[pos + 4 : pos + 8]
        body_start = pos + 8
        crc_start = body_start + length
        if crc_start + 4 > len(data):
            raise DecodeError(
                f"truncated PNG chunk {ctype!r}: need {length + 4} more bytes",
                offset=len(data),
            )
        body = data[body_start:crc_start]
        (stored_crc,) = struct.unpack(">I", data[crc_start : crc_start + 4])
        if zlib.crc32(ctype + body) & 0xFFFFFFFF != stored_crc:
            raise DecodeError(f"PNG chunk {ctype!r} CRC mismatch", offset=crc_start)
        if not saw_ihdr:
            if ctype != b"IHDR":
                raise DecodeError("first PNG chunk is not IHDR", offset=pos + 4)
            _check_ihdr(body, body_start)
            saw_ihdr = True
        if ctype == b"IEND":
            saw_iend = True
            break
        pos = crc_start + 4
    if not saw_ihdr:
        raise DecodeError("PNG stream has no chunks", offset=len(_PNG_SIGNATURE))
    if not saw_iend:
        raise DecodeError("PNG stream ends without IEND", offset=len(data))


def _check_ihdr(body: bytes, body_offset: int) -> None:
    if len(body) != 13:
        raise DecodeError("IHDR has wrong length", offset=body_offset)
    width, height, depth, color_type, _comp, _filt, interlace = struct.unpack(
        ">IIBBBBB", body
    )
    if width == 0 or height == 0:
        raise DecodeError("PNG has zero width or height", offset=body_offset)
    if depth != 8:
        raise UnsupportedFormatError(f"unsupported PNG bit depth {depth} (only 8-bit)")
    if color_type == 3:
        raise UnsupportedFormatError("unsupported PNG color type: palette")
    if color_type in (4, 6):
        raise UnsupportedFormatError("unsupported PNG color type: alpha channel")
    if color_type not in _PNG_COLOR_TYPES:
        raise UnsupportedFormatError(f"unsupported PNG color type {color_type}")
    if interlace != 0:
        raise UnsupportedFormatError("unsupported PNG interlacing")


# -- PPM / PGM -----------------------------------------------------------

def _decode_pnm(data: bytes) -> np.ndarray:
    channels = 1 if data[:2] == b"P5" else 3
    pos = 2
    fields = []
    while len(fields) < 3:
        token, pos = _next_pnm_token(data, pos)
        fields.append(token)
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise DecodeError("non-numeric PNM header field", offset=pos) from None
    if width <= 0 or height <= 0:
        raise DecodeError("PNM has nonpositive dimensions", offset=pos)
    if maxval > 255:
        raise UnsupportedFormatError(f"unsupported PNM maxval {maxval} (16-bit input)")
    if maxval != 255:
        raise UnsupportedFormatError(f"unsupported PNM maxval {maxval} (must be 255)")
    # exactly one whitespace byte separates the header from raw samples
    if pos >= len(data) or data[pos] not in b" \t\r\n":
        raise DecodeError("missing whitespace after PNM maxval", offset=pos)
    pos += 1
    need = width * height * channels
    have = len(data) - pos
    if have < need:
        raise DecodeError(
            f"truncated PNM pixel data: need {need} bytes, have {have}",
            offset=len(data),
        )
    raw = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    arr = raw.astype(np.float32) / 255.0
    if channels == 1:
        return arr.reshape(height, width).copy()
    return arr.reshape(height, width, 3).copy()


def _next_pnm_token(data: bytes, pos: int):
    """Scan past whitespace and '#' comments to the next header token."""
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in b" \t\r\n":
            pos += 1
        elif c in b"#":
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise DecodeError("truncated PNM header", offset=pos)
    start = pos
    while pos < n and data[pos] not in b" \t\r\n#":
        pos += 1
    return data[start:pos], pos
