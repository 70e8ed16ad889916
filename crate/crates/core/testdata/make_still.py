"""Regenerates coffee_still.y4m from scikit-image's `coffee` sample (public domain)."""
import numpy as np
from PIL import Image
from skimage import data

W, H = 320, 212

rgb = np.asarray(Image.fromarray(data.coffee()).resize((W, H), Image.LANCZOS), dtype=np.float64)
r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
y = 16 + (65.481 * r + 128.553 * g + 24.966 * b) / 255
u = 128 + (-37.797 * r - 74.203 * g + 112.0 * b) / 255
v = 128 + (112.0 * r - 93.786 * g - 18.214 * b) / 255


def sub(c):
    return c.reshape(H // 2, 2, W // 2, 2).mean(axis=(1, 3))


planes = [np.clip(np.rint(p), 0, 255).astype(np.uint8) for p in (y, sub(u), sub(v))]
with open(__file__.rsplit("/", 1)[0] + "/coffee_still.y4m", "wb") as f:
    f.write(f"YUV4MPEG2 W{W} H{H} F30:1 Ip A1:1 C420jpeg\n".encode())
    f.write(b"FRAME\n")
    for p in planes:
        f.write(p.tobytes())
