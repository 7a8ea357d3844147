"""Compiled inner loops.

Everything here is an ``@njit`` twin of a pure-Python operation defined
elsewhere in the package.  The twins must stay bit-identical: tests pin the
random streams, the trigonometry, and whole trajectories against the Python
side.  Two details matter for that equality and are easy to break:

* All randomness flows through the one-word ``uint64`` state array that
  ``rng.Rng`` owns, using the same splitmix64 constants and the same
  rejection rule for bounded draws.
* All trigonometry goes through :func:`cos_sin`.  Calling ``math.cos`` and
  ``math.sin`` as an adjacent pair inside a compiled loop lets LLVM fuse them
  into a combined sincos with different last-bit rounding, so both the kernels
  and the Python operations obtain their pair from this single helper.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

U64 = np.uint64

_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_R30 = U64(30)
_R27 = U64(27)
_R31 = U64(31)
_R11 = U64(11)
_U64_MAX = U64(0xFFFFFFFFFFFFFFFF)
_ZERO = U64(0)

_INV53 = 1.0 / 9007199254740992.0

TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def next_u64(state):
    z = state[0] + _GAMMA
    state[0] = z
    z = (z ^ (z >> _R30)) * _MIX1
    z = (z ^ (z >> _R27)) * _MIX2
    return z ^ (z >> _R31)


@njit(cache=True, inline="always")
def next_float(state):
    return float(next_u64(state) >> _R11) * _INV53


@njit(cache=True, inline="always")
def next_below(state, n):
    # Rejection: drop the incomplete block of size (2**64 mod n) at the top.
    un = U64(n)
    r = (_ZERO - un) % un
    while True:
        u = next_u64(state)
        if _U64_MAX - u >= r:
            return np.int64(u % un)


@njit(cache=True)
def shuffle_identity(order, state):
    # Fisher-Yates over a freshly written identity permutation.
    n = order.size
    for i in range(n):
        order[i] = i
    for i in range(n - 1, 0, -1):
        j = next_below(state, i + 1)
        t = order[i]
        order[i] = order[j]
        order[j] = t


@njit(cache=True)
def diffuse_kernel(src, habitable, wrap_y, decay):
    """3x3 uniform mean filter followed by multiplicative decay.

    Neighbours accumulate in raster order: the row above, the cell's own
    row, then the row below, west to center to east within each row.
    Uninhabitable cells contribute zero and come out zero; x always wraps,
    y wraps only when ``wrap_y`` and otherwise reads zero past the edges.
    """
    height, width = src.shape
    out = np.empty_like(src)
    keep = 1.0 - decay
    for y in range(height):
        ym = y - 1
        yp = y + 1
        if wrap_y:
            if ym < 0:
                ym = height - 1
            if yp >= height:
                yp = 0
        above = 0 <= ym
        below = yp < height
        for x in range(width):
            if not habitable[y, x]:
                out[y, x] = 0.0
                continue
            xm = x - 1 if x > 0 else width - 1
            xp = x + 1 if x < width - 1 else 0
            s = 0.0
            if above:
                if habitable[ym, xm]:
                    s += src[ym, xm]
                if habitable[ym, x]:
                    s += src[ym, x]
                if habitable[ym, xp]:
                    s += src[ym, xp]
            if habitable[y, xm]:
                s += src[y, xm]
            s += src[y, x]
            if habitable[y, xp]:
                s += src[y, xp]
            if below:
                if habitable[yp, xm]:
                    s += src[yp, xm]
                if habitable[yp, x]:
                    s += src[yp, x]
                if habitable[yp, xp]:
                    s += src[yp, xp]
            out[y, x] = s / 9.0 * keep
    return out


@njit(cache=True)
def masked_add(values, region, amount):
    # values[cell] += amount wherever the region mask is set
    height, width = values.shape
    for y in range(height):
        for x in range(width):
            if region[y, x]:
                values[y, x] += amount


@njit(cache=True)
def masked_scale(values, region, factor):
    # values[cell] *= factor wherever the region mask is set
    height, width = values.shape
    for y in range(height):
        for x in range(width):
            if region[y, x]:
                values[y, x] *= factor


@njit(cache=True)
def cos_sin(angle):
    # Sole trig entry point; see the module docstring.
    return math.cos(angle), math.sin(angle)


@njit(cache=True, inline="always")
def wrap_coord(v, period):
    r = v % period
    if r >= period:
        # v slightly below 0 can round v % period up to the period itself.
        r -= period
    return r


@njit(cache=True, inline="always")
def wrap_bounded(v, period):
    # Branch form of wrap_coord, valid (and bit-identical to it) for
    # positive-zero-free v in [-period, 2*period).
    if v >= period:
        v -= period
    elif v < 0.0:
        v += period
    if v >= period:
        # tiny negative v plus the period can round up to the period
        v -= period
    return v


@njit(cache=True, inline="always")
def wrap_angle(a):
    r = a % TWO_PI
    if r >= TWO_PI:
        r -= TWO_PI
    return r


@njit(cache=True, inline="always")
def sense_cell(px, py, trail, habitable, light, attenuation):
    """Trail value at the cell containing (px, py), after light attenuation.

    ``px`` must already be wrapped into [0, width); Y outside the grid or an
    uninhabitable cell reads zero.
    """
    height = trail.shape[0]
    cy = int(math.floor(py))
    if cy < 0 or cy >= height:
        return 0.0
    cx = int(math.floor(px))
    if not habitable[cy, cx]:
        return 0.0
    v = trail[cy, cx]
    if light[cy, cx]:
        v *= attenuation
    return v


@njit(cache=True, inline="always")
def sense_one(ax, ay, ch, sh, ca, sa, sensor_offset, trail, habitable, light,
              attenuation):
    """Front / front-left / front-right samples for one agent.

    ``ch, sh`` are cos/sin of the heading and ``ca, sa`` cos/sin of the sensor
    angle, both produced by :func:`cos_sin`; the side directions come from the
    angle-addition identities so no further trig is needed.
    """
    so = sensor_offset
    wf = float(trail.shape[1])
    fx = ax + so * ch
    lx = ax + so * (ch * ca - sh * sa)
    rx = ax + so * (ch * ca + sh * sa)
    if so <= 0.5 * wf:
        fx = wrap_bounded(fx, wf)
        lx = wrap_bounded(lx, wf)
        rx = wrap_bounded(rx, wf)
    else:
        fx = wrap_coord(fx, wf)
        lx = wrap_coord(lx, wf)
        rx = wrap_coord(rx, wf)
    f = sense_cell(fx, ay + so * sh, trail, habitable, light, attenuation)
    fl = sense_cell(lx, ay + so * (sh * ca + ch * sa),
                    trail, habitable, light, attenuation)
    fr = sense_cell(rx, ay + so * (sh * ca - ch * sa),
                    trail, habitable, light, attenuation)
    return f, fl, fr


@njit(cache=True, inline="always")
def decide_one(front, front_left, front_right, rotation_angle, state):
    """Heading change for one agent; draws from the stream only on the
    front-strictly-smallest branch."""
    if front > front_left and front > front_right:
        return 0.0
    if front < front_left and front < front_right:
        if next_float(state) < 0.5:
            return rotation_angle
        return -rotation_angle
    if front_right < front_left:
        return rotation_angle
    if front_left < front_right:
        return -rotation_angle
    return 0.0


@njit(cache=True, inline="always")
def move_one(agent_id, px, py, ph, ch, sh, occupancy, habitable, trail,
             step_size, deposit, rotation_angle, blocked_rotate, state):
    """Attempt one step forward; deposit on success, reorient when blocked.

    ``ch, sh`` must be ``cos_sin(ph)``; callers that already hold them avoid
    recomputing the direction.  Returns ``(moved, x, y, heading)``.
    Occupancy and trail are updated in place; the caller stores the returned
    coordinates.
    """
    height, width = trail.shape
    wf = float(width)
    raw = px + step_size * ch
    if step_size <= 0.5 * wf:
        nx = wrap_bounded(raw, wf)
    else:
        nx = wrap_coord(raw, wf)
    ny = py + step_size * sh
    ok = False
    cy = int(math.floor(ny))
    cx = 0
    if 0 <= cy < height:
        cx = int(math.floor(nx))
        if habitable[cy, cx]:
            occ = occupancy[cy, cx]
            # staying inside the current cell counts as a move
            if occ < 0 or occ == agent_id:
                ok = True
    if ok:
        oy = int(math.floor(py))
        ox = int(math.floor(px))
        occupancy[oy, ox] = -1
        occupancy[cy, cx] = agent_id
        trail[cy, cx] += deposit
        return True, nx, ny, ph
    if blocked_rotate:
        if next_float(state) < 0.5:
            nh = wrap_angle(ph + rotation_angle)
        else:
            nh = wrap_angle(ph - rotation_angle)
    else:
        nh = next_float(state) * TWO_PI
    return False, px, py, nh


@njit(cache=True)
def agent_pass(x, y, heading, occupancy, habitable, trail, light, state,
               sensor_angle, rotation_angle, sensor_offset, step_size,
               deposit, attenuation, two_pass, blocked_rotate):
    """One scheduler sweep over every agent in a fresh random order.

    With ``two_pass`` false each agent senses, turns and moves before the
    next agent is visited; with it true a full sensing/turning sweep runs
    first and a second, independently shuffled sweep does the movement.
    Returns the number of agents that moved.
    """
    n = x.size
    ca, sa = cos_sin(sensor_angle)
    order = np.empty(n, dtype=np.int64)
    shuffle_identity(order, state)
    moved = 0
    if not two_pass:
        for k in range(n):
            i = order[k]
            ch, sh = cos_sin(heading[i])
            f, fl, fr = sense_one(x[i], y[i], ch, sh, ca, sa, sensor_offset,
                                  trail, habitable, light, attenuation)
            d = decide_one(f, fl, fr, rotation_angle, state)
            if d != 0.0:
                heading[i] = wrap_angle(heading[i] + d)
                ch, sh = cos_sin(heading[i])
            did, nx, ny, nh = move_one(i, x[i], y[i], heading[i], ch, sh,
                                       occupancy, habitable, trail,
                                       step_size, deposit, rotation_angle,
                                       blocked_rotate, state)
            x[i] = nx
            y[i] = ny
            heading[i] = nh
            if did:
                moved += 1
    else:
        for k in range(n):
            i = order[k]
            ch, sh = cos_sin(heading[i])
            f, fl, fr = sense_one(x[i], y[i], ch, sh, ca, sa, sensor_offset,
                                  trail, habitable, light, attenuation)
            d = decide_one(f, fl, fr, rotation_angle, state)
            if d != 0.0:
                heading[i] = wrap_angle(heading[i] + d)
        shuffle_identity(order, state)
        for k in range(n):
            i = order[k]
            ch, sh = cos_sin(heading[i])
            did, nx, ny, nh = move_one(i, x[i], y[i], heading[i], ch, sh,
                                       occupancy, habitable, trail,
                                       step_size, deposit, rotation_angle,
                                       blocked_rotate, state)
            x[i] = nx
            y[i] = ny
            heading[i] = nh
            if did:
                moved += 1
    return moved
