import numpy as np

from errors import IntegrationError


def rk4_step(rhs, t, y, dt):
    """One classical Runge-Kutta step for y' = rhs(t, y) on numpy arrays"""
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, y + dt / 2 * k1)
    k3 = rhs(t + dt / 2, y + dt / 2 * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def runge_kutta(rhs, y0, T, steps, t0=0.0, project=None):
    """Fixed-step RK4 from t0 to t0 + T.

    Yields (t, y) for every grid node, the initial one included. `project`
    is applied after each step to pull the state back onto its constraint
    set. Non-finite states raise IntegrationError with the offending time.
    """
    dt = T / steps
    y = np.array(y0, copy=True)
    yield t0, y
    for k in range(steps):
        t = t0 + k * dt
        y = rk4_step(rhs, t, y, dt)
        if project is not None:
            y = project(y)
        t_next = t0 + (k + 1) * dt
        if not np.all(np.isfinite(y)):
            raise IntegrationError("State became non-finite during integration", t_next)
        yield t_next, y


def integrate_on_grid(rhs, y0, T, steps, t0=0.0, project=None):
    """Collect the runge_kutta nodes into (times, states) arrays"""
    states = np.empty((steps + 1,) + np.shape(y0), dtype=np.result_type(y0, float))
    for k, (_, y) in enumerate(runge_kutta(rhs, y0, T, steps, t0=t0, project=project)):
        states[k] = y
    times = t0 + (T / steps) * np.arange(steps + 1)
    return times, states
