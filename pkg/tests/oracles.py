"""Brute-force reference implementations used to check the package.

Everything here is plain Python over nested lists; nothing imports the
package's numeric code paths.
"""

from collections import deque
from fractions import Fraction


def brute_morph(img, offsets, op):
    h, w = len(img), len(img[0])
    out = [[0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            vals = []
            for dx, dy in offsets:
                xx = min(max(x + dx, 0), w - 1)
                yy = min(max(y + dy, 0), h - 1)
                vals.append(img[yy][xx])
            out[y][x] = op(vals)
    return out


def brute_dilate(img, offsets):
    return brute_morph(img, offsets, max)


def brute_erode(img, offsets):
    return brute_morph(img, offsets, min)


def brute_close(img, offsets):
    # true closing: dilate by the reflected element, then erode
    reflected = [(-dx, -dy) for dx, dy in offsets]
    return brute_erode(brute_dilate(img, reflected), offsets)


def brute_otsu(pixels):
    """Exhaustive scan of T in 0..255 with exact rationals; smallest T on ties.

    sigma_b^2(T) = w0 * w1 * (mu0 - mu1)^2 with class 0 = {v <= T}.
    """
    n = len(pixels)
    hist = [0] * 256
    for v in pixels:
        hist[v] += 1
    if sum(1 for c in hist if c) == 1:
        return pixels[0]
    total_sum = sum(i * c for i, c in enumerate(hist))
    best_t, best_var = None, None
    n0 = s0 = 0
    var = Fraction(0)
    for t in range(256):
        if hist[t] or t == 0:
            n0 += hist[t]
            s0 += t * hist[t]
            n1 = n - n0
            if n0 == 0 or n1 == 0:
                var = Fraction(0)
            else:
                w0, w1 = Fraction(n0, n), Fraction(n1, n)
                mu0 = Fraction(s0, n0)
                mu1 = Fraction(total_sum - s0, n1)
                var = w0 * w1 * (mu0 - mu1) ** 2
        # an empty bin leaves both classes, hence var, unchanged
        if best_var is None or var > best_var:
            best_t, best_var = t, var
    return best_t


def flood_fill_components(binary):
    """8-connected components as (pixel_count, (x0, y0, x1, y1)) via BFS."""
    h, w = len(binary), len(binary[0])
    seen = [[False] * w for _ in range(h)]
    comps = []
    for y in range(h):
        for x in range(w):
            if binary[y][x] and not seen[y][x]:
                q = deque([(x, y)])
                seen[y][x] = True
                xs, ys = [], []
                while q:
                    cx, cy = q.popleft()
                    xs.append(cx)
                    ys.append(cy)
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            nx, ny = cx + dx, cy + dy
                            if 0 <= nx < w and 0 <= ny < h and binary[ny][nx] and not seen[ny][nx]:
                                seen[ny][nx] = True
                                q.append((nx, ny))
                comps.append((len(xs), (min(xs), min(ys), max(xs) + 1, max(ys) + 1)))
    return comps


def brute_iou(a, b):
    """IoU of two (x0, y0, x1, y1) tuples by counting covered unit cells' extent."""
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = max(0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def brute_best(gts, proposals):
    """Double loop: best IoU per (image_id, class, box) ground truth."""
    best = []
    for image_id, _, gbox in gts:
        m = 0.0
        for l in proposals.get(image_id, []):
            m = max(m, brute_iou(gbox, l))
        best.append(m)
    return best


def brute_metrics(gts, proposals, thresholds):
    """(per-class ABO, MABO, recalls on thresholds, trapezoid AR)."""
    best = brute_best(gts, proposals)
    classes = {}
    for (_, c, _), b in zip(gts, best):
        classes.setdefault(c, []).append(b)
    per_class = {c: sum(v) / len(v) for c, v in classes.items()}
    mabo = sum(per_class.values()) / len(per_class)
    recalls = [sum(1 for b in best if b >= t) / len(best) for t in thresholds]
    ar = 0.0
    for i in range(len(thresholds) - 1):
        ar += (thresholds[i + 1] - thresholds[i]) * (recalls[i] + recalls[i + 1]) / 2
    return per_class, mabo, recalls, ar


def brute_area_downscale(img, oh, ow):
    """Area-average by explicit fractional cell overlap with exact rationals."""
    h, w = len(img), len(img[0])
    sy, sx = Fraction(h, oh), Fraction(w, ow)
    out = [[0] * ow for _ in range(oh)]
    for i in range(oh):
        for j in range(ow):
            y0, y1 = i * sy, (i + 1) * sy
            x0, x1 = j * sx, (j + 1) * sx
            acc = Fraction(0)
            for y in range(h):
                oy = min(y1, y + 1) - max(y0, y)
                if oy <= 0:
                    continue
                for x in range(w):
                    ox = min(x1, x + 1) - max(x0, x)
                    if ox > 0:
                        acc += oy * ox * img[y][x]
            mean = acc / (sy * sx)
            out[i][j] = int(mean + Fraction(1, 2)) if mean >= 0 else 0
    return out
