"""Closed-form reference constructions used as independent test oracles.

Everything here works through explicit embeddings of the round sphere and
the hyperbolic half-plane, so none of it touches the package's
integrators, shooting, or transport code.
"""

import numpy as np


# ---------------------------------------------------------------------------
# Round unit sphere, chart (theta, phi)


def sphere_embed(x):
    th, ph = float(x[0]), float(x[1])
    return np.array(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
    )


def sphere_chart(point3):
    x, y, z = point3
    return np.array([np.arccos(np.clip(z, -1.0, 1.0)), np.arctan2(y, x)])


def sphere_embed_jacobian(x):
    th, ph = float(x[0]), float(x[1])
    return np.array(
        [
            [np.cos(th) * np.cos(ph), -np.sin(th) * np.sin(ph)],
            [np.cos(th) * np.sin(ph), np.sin(th) * np.cos(ph)],
            [-np.sin(th), 0.0],
        ]
    )


def sphere_distance(a, b):
    return float(np.arccos(np.clip(sphere_embed(a) @ sphere_embed(b), -1.0, 1.0)))


def sphere_exp_chart(p, v_chart, t=1.0):
    """Great-circle endpoint in chart coordinates."""
    e = sphere_embed(p)
    v3 = sphere_embed_jacobian(p) @ np.asarray(v_chart, dtype=float)
    speed = np.linalg.norm(v3)
    if speed == 0.0:
        return np.asarray(p, dtype=float).copy()
    s = speed * t
    point = np.cos(s) * e + np.sin(s) * v3 / speed
    return sphere_chart(point)


def sphere_log_chart(p, x):
    """Inverse exponential in chart components at p."""
    ep, ex = sphere_embed(p), sphere_embed(x)
    c = np.clip(ep @ ex, -1.0, 1.0)
    theta = np.arccos(c)
    if theta < 1e-15:
        return np.zeros(2)
    u3 = (theta / np.sin(theta)) * (ex - c * ep)
    jac = sphere_embed_jacobian(p)
    comp, *_ = np.linalg.lstsq(jac, u3, rcond=None)
    return comp


def sphere_triangle_area(vertices_chart):
    """Spherical excess from the embedded corner angles (Girard)."""
    pts = [sphere_embed(np.asarray(v, dtype=float)) for v in vertices_chart]

    def corner(p, q, r):
        u = q - (p @ q) * p
        v = r - (p @ r) * p
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        return np.arccos(np.clip(u @ v, -1.0, 1.0))

    a, b, c = pts
    return corner(a, b, c) + corner(b, a, c) + corner(c, a, b) - np.pi


def great_circle_nodes(a_chart, b_chart, n=200):
    """Chart nodes of the minor great-circle arc from a to b."""
    ea, eb = sphere_embed(a_chart), sphere_embed(b_chart)
    ang = np.arccos(np.clip(ea @ eb, -1.0, 1.0))
    perp = eb - np.cos(ang) * ea
    perp /= np.linalg.norm(perp)
    ss = np.linspace(0.0, ang, n)
    pts = np.array([np.cos(s) * ea + np.sin(s) * perp for s in ss])
    return ss, np.array([sphere_chart(p) for p in pts])


# ---------------------------------------------------------------------------
# Hyperbolic half-plane, chart (x, y), metric diag(1/y^2, 1/y^2)

_MINK = np.diag([-1.0, 1.0, 1.0])


def halfplane_distance(a, b):
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    arg = 1.0 + ((ax - bx) ** 2 + (ay - by) ** 2) / (2.0 * ay * by)
    return float(np.arccosh(arg))


def hyperboloid_embed(a):
    x, y = float(a[0]), float(a[1])
    s = x * x + y * y
    return np.array([(s + 1.0) / (2.0 * y), x / y, (s - 1.0) / (2.0 * y)])


def hyperboloid_embed_jacobian(a, h=1e-7):
    a = np.asarray(a, dtype=float)
    cols = []
    for j in range(2):
        ap = a.copy()
        am = a.copy()
        ap[j] += h
        am[j] -= h
        cols.append((hyperboloid_embed(ap) - hyperboloid_embed(am)) / (2 * h))
    return np.column_stack(cols)


def hyperboloid_chart(point3):
    denom = point3[0] - point3[2]
    return np.array([point3[1] / denom, 1.0 / denom])


def halfplane_exp_chart(p, v_chart, t=1.0):
    """Hyperbolic exponential through the hyperboloid model."""
    x = hyperboloid_embed(p)
    u3 = hyperboloid_embed_jacobian(p) @ np.asarray(v_chart, dtype=float)
    speed = np.sqrt(max(float(u3 @ _MINK @ u3), 0.0))
    if speed == 0.0:
        return np.asarray(p, dtype=float).copy()
    s = speed * t
    point = np.cosh(s) * x + np.sinh(s) * u3 / speed
    return hyperboloid_chart(point)


def halfplane_log_chart(p, x):
    """Inverse exponential in half-plane chart components at p."""
    ep, ex = hyperboloid_embed(p), hyperboloid_embed(x)
    c = -float(ep @ _MINK @ ex)  # cosh of the distance
    d = float(np.arccosh(max(c, 1.0)))
    if d < 1e-15:
        return np.zeros(2)
    u3 = (d / np.sinh(d)) * (ex - c * ep)
    jac = hyperboloid_embed_jacobian(p)
    comp, *_ = np.linalg.lstsq(jac, u3, rcond=None)
    return comp


def oracle_symmetric_log_ratio(log_chart, exp_points, p, h_comp, r, dt, gnorm):
    """Reference value for the symmetric-difference ratio at radius r.

    ``exp_points`` must produce the four probe points from closed forms;
    ``log_chart`` pulls them back at p; the quotient mirrors the package's
    forward-difference estimator but uses only closed-form ingredients.
    """
    x_p, x_m = exp_points(r, dt)
    mu_p = log_chart(p, x_p)
    mu_m = log_chart(p, x_m)
    v_plus = (mu_p - r * h_comp) / dt
    v_minus = (mu_m + r * h_comp) / dt
    return gnorm(p, v_plus - v_minus) / r
