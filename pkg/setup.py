#!/usr/bin/env python3
"""
dosctrl Setup Script for New Users
Installs dependencies, writes a .env file and runs a smoke certification
"""

import os
import sys
import subprocess
from pathlib import Path

DEFAULTS = {
    'DOSCTRL_SEED': '0',
    'DOSCTRL_OUT_DIR': 'out',
    'DOSCTRL_LOG_DIR': 'logs',
    'DOSCTRL_LOG_LEVEL': 'info',
    'DOSCTRL_FILE_LOGGING': 'false',
    'DOSCTRL_WORKERS': '1',
}


def create_env_file():
    """Create .env file with user input"""
    env_path = Path('.env')

    if env_path.exists():
        response = input("⚠️  .env file already exists. Overwrite? [y/N]: ")
        if response.lower() != 'y':
            print("✅ Using existing .env file")
            return True

    print("\n🔧 Setting up environment variables (press Enter to keep the default)...")
    values = {}
    for key, default in DEFAULTS.items():
        answer = input(f"   {key} [{default}]: ").strip()
        values[key] = answer or default

    if not values['DOSCTRL_SEED'].isdigit():
        print("❌ DOSCTRL_SEED must be a non-negative integer. Setup cancelled.")
        return False
    if not values['DOSCTRL_WORKERS'].isdigit() or int(values['DOSCTRL_WORKERS']) < 1:
        print("❌ DOSCTRL_WORKERS must be a positive integer. Setup cancelled.")
        return False

    env_content = "# dosctrl Environment Configuration\n" + "".join(
        f"{key}={value}\n" for key, value in values.items()
    )

    with open(env_path, 'w') as f:
        f.write(env_content)

    print("✅ .env file created successfully!")
    return True


def install_dependencies():
    """Install Python dependencies"""
    print("\n📦 Installing Python dependencies...")

    try:
        subprocess.run([sys.executable, '-m', 'pip', 'install', '-r', 'requirements.txt'],
                       check=True, capture_output=True, text=True)
        print("✅ Dependencies installed successfully!")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install dependencies: {e}")
        print("Please run manually: pip install -r requirements.txt")
        return False


def test_setup():
    """Certify the embedded example to check numerics and configuration"""
    print("\n🧪 Testing setup...")

    if not Path('.env').exists():
        print("❌ .env file not found")
        return False

    from dotenv import load_dotenv
    load_dotenv()

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dosctrl_project.settings')
    try:
        import django
        django.setup()
        from dosctrl_app.utils.certify import build_cert, sigma_max
        from dosctrl_app.utils.control import Gain, Plant
        from dosctrl_app.utils.reproduction import A, B, K
    except ImportError as e:
        print(f"❌ Failed to import toolkit modules: {e}")
        return False

    cert = build_cert(Plant(A, B), Gain(K))
    print(f"✅ Certificate built: gamma2={cert.gamma2:.4f}, sigma_max={sigma_max(cert):.4f}")
    return True


def main():
    """Main setup function"""
    print("🚀 dosctrl Setup Script")
    print("=" * 50)

    # Check if we're in the right directory
    if not Path('cli.py').exists():
        print("❌ Error: cli.py not found. Please run this script from the project directory.")
        sys.exit(1)

    print("📂 Setting up dosctrl in:", os.getcwd())

    # Step 1: Install dependencies
    if not install_dependencies():
        print("⚠️  Dependency installation failed. Please install manually and re-run.")
        return

    # Step 2: Create .env file
    if not create_env_file():
        print("⚠️  Environment setup failed. Please create .env file manually.")
        return

    # Step 3: Smoke test
    if test_setup():
        print("\n🎉 Setup completed successfully!")
        print("\n🚀 You can now run the CLI with:")
        print("   python cli.py reproduce-iv --out results/")
        print("\n📖 See README.md for the scenario format and every subcommand.")
    else:
        print("\n⚠️  Setup completed with warnings. Please check the issues above.")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # Invoked by a build tool (pip/setuptools): metadata lives in pyproject.toml
        from setuptools import setup
        setup()
    else:
        main()
