"""Independent reference results used by the tests.

Nothing here imports the package; these are closed-form or brute-force
routes to the same quantities.
"""
import numpy as np


def two_level_excited(gamma, rabi, detuning=0.0):
    """Steady-state excited population of a driven two-level atom."""
    return (rabi**2 / 4) / (detuning**2 + gamma**2 / 4 + rabi**2 / 2)


def two_level_g2(gamma, rabi, tau_us):
    """Resonant two-level g2; valid on both sides of the over-damped point."""
    mu = np.sqrt(complex(rabi**2 - gamma**2 / 16))
    t = np.asarray(tau_us, dtype=float)
    if abs(mu) < 1e-12:
        osc = 1 + 3 * gamma / 4 * t
    else:
        osc = np.cos(mu * t) + (3 * gamma / (4 * mu)) * np.sin(mu * t)
    return np.real(1 - np.exp(-3 * gamma * t / 4) * osc)


def two_level_g1(gamma, rabi, tau_us):
    """Resonant two-level g1 from the Bloch-vector regression, solved in closed form.

    With s = 2 Omega^2 / Gamma^2 the quadrature U = X + Y decays at Gamma/2
    and (W, Z) relax through M = [[-G/2, -Om], [Om, -G]], whose exponential is
    e^{-3Gt/4} [cos(mu t) I + sin(mu t)/mu (M + 3G/4 I)].
    """
    g, om = gamma, rabi
    t = np.asarray(tau_us, dtype=float)
    s = 2 * om**2 / g**2
    rho_ee = s / (2 * (1 + s))
    w_ss = 2 * om / (g * (1 + s))
    c = 1j * w_ss / 2  # <sigma+>
    u = rho_ee * np.exp(-g * t / 2)
    w_inf = 2 * om * c / (g * (1 + s))
    z_inf = -c / (1 + s)
    d0 = np.array([1j * rho_ee - w_inf, -c - z_inf])
    m = np.array([[-g / 2, -om], [om, -g]], dtype=complex)
    mu = np.sqrt(complex(om**2 - g**2 / 16))
    shifted = m + 0.75 * g * np.eye(2)
    out = np.empty(t.shape, dtype=complex)
    for k, tk in enumerate(t.ravel()):
        if abs(mu) < 1e-12:
            e = np.exp(-0.75 * g * tk) * (np.eye(2) + tk * shifted)
        else:
            e = np.exp(-0.75 * g * tk) * (np.cos(mu * tk) * np.eye(2) + np.sin(mu * tk) / mu * shifted)
        w = w_inf + (e @ d0)[0]
        out.ravel()[k] = (u.ravel()[k] - 1j * w) / 2
    return out / rho_ee


def brute_pairs(a, b, bin_ps, window_ps):
    """O(n^2) multistop histogram with bins centred on multiples of bin_ps."""
    n = window_ps // bin_ps
    counts = np.zeros(2 * n + 1, dtype=np.int64)
    for ta in a:
        for tb in b:
            dt = int(tb) - int(ta)
            # bin k covers [(k - 1/2) bin, (k + 1/2) bin)
            k = int(np.floor((2 * dt + bin_ps) / (2 * bin_ps)))
            if -n <= k <= n:
                counts[k + n] += 1
    return counts


def brute_first_stop(starts, stops, bin_ps, window_ps):
    """Reference start-stop converter.

    Stops pass a delay line of length -lo_edge, so a start accepts the first
    stop with t - s >= lo_edge; the converter stays busy until that delayed
    stop arrives, or for the full range if none does.
    """
    n = window_ps // bin_ps
    lo_edge = -n * bin_ps - bin_ps / 2
    hi_edge = n * bin_ps + bin_ps / 2
    counts = np.zeros(2 * n + 1, dtype=np.int64)
    busy_until = -np.inf
    for s in starts:
        if s < busy_until:
            continue
        cand = [t for t in stops if lo_edge <= t - s < hi_edge]
        if cand:
            t = min(cand)
            k = int(np.floor((2 * (t - s) + bin_ps) / (2 * bin_ps)))
            counts[k + n] += 1
            busy_until = t - lo_edge
        else:
            busy_until = s + (hi_edge - lo_edge)
    return counts
