#!/usr/bin/env python3
"""
Diagnostic script to check if all dependencies are working correctly.
"""
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def check_numpy():
    """Check if NumPy is installed."""
    try:
        import numpy as np
        print(f"[OK] NumPy installed: version {np.__version__}")
        return True
    except ImportError as e:
        print(f"[FAIL] NumPy not installed: {e}")
        return False


def check_scipy():
    """Check SciPy and run a small Hermitian eigensolve through LAPACK."""
    try:
        import numpy as np
        import scipy
        from scipy import linalg
        print(f"[OK] SciPy installed: version {scipy.__version__}")
        A = np.array([[2.0, 1.0j], [-1.0j, 2.0]])
        w = linalg.eigvalsh(A)
        if np.allclose(w, [1.0, 3.0]):
            print("[OK] LAPACK Hermitian eigensolver working")
            return True
        print(f"[FAIL] Eigensolver returned {w}, expected [1, 3]")
        return False
    except ImportError as e:
        print(f"[FAIL] SciPy not installed: {e}")
        return False


def check_joblib():
    try:
        import joblib
        from joblib import Parallel, delayed
        out = Parallel(n_jobs=1)(delayed(abs)(-k) for k in range(3))
        print(f"[OK] joblib installed: version {joblib.__version__} ({out})")
        return True
    except ImportError as e:
        print(f"[FAIL] joblib not installed: {e}")
        return False


def check_tqdm():
    try:
        import tqdm
        print(f"[OK] tqdm installed: version {tqdm.__version__}")
        return True
    except ImportError as e:
        print(f"[FAIL] tqdm not installed: {e}")
        return False


def check_environment():
    """Report the lab's environment variables."""
    from core.errors import ConfigError
    from core.settings import MAX_MODES_ENV, THREADS_ENV, NumericalSettings
    for name in (THREADS_ENV, MAX_MODES_ENV):
        print(f"  {name} = {os.environ.get(name, '(unset)')}")
    try:
        s = NumericalSettings.from_env()
        print(f"[OK] Settings: n_jobs={s.n_jobs}, max_modes={s.max_modes}")
        return True
    except ConfigError as e:
        print(f"[FAIL] Bad environment: {e}")
        return False


def check_car_smoke():
    """Build a 4-mode CAR algebra and check {a_i, a_j*} = delta_ij."""
    try:
        import numpy as np
        from labs.fock_car.car import build_car
        from labs.fock_car.modes import ModeSpace
        car = build_car(ModeSpace.generic(4))
        worst = 0.0
        for i in range(4):
            for j in range(4):
                anti = (car.annihilators[i] @ car.creators[j] + car.creators[j] @ car.annihilators[i]).toarray()
                expected = np.eye(car.fock_dim) if i == j else 0.0
                worst = max(worst, float(np.max(np.abs(anti - expected))))
        if worst < 1e-12:
            print("[OK] CAR relations hold on 4 modes")
            return True
        print(f"[FAIL] CAR relation residual {worst:.2e}")
        return False
    except Exception as e:
        print(f"[FAIL] CAR smoke test raised {type(e).__name__}: {e}")
        return False


def main():
    print("=" * 50)
    print("Flux Lab Setup Diagnostics")
    print("=" * 50)
    print()

    print("Checking dependencies...")
    print("-" * 50)
    results = [check_numpy(), check_scipy(), check_joblib(), check_tqdm()]
    print()

    print("Checking configuration...")
    print("-" * 50)
    results.append(check_environment())
    print()

    print("Running smoke test...")
    print("-" * 50)
    results.append(check_car_smoke())
    print()

    print("=" * 50)
    print("Summary")
    print("=" * 50)
    if all(results):
        print("[OK] Ready. Try: python lab_launcher.py index-pair --example shift")
    else:
        print("[FAIL] Some checks failed")
        print("To install the dependencies:")
        print("  pip install -r requirements.txt")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
