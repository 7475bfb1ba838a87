"""
Launcher for the SIRS/V command line
Run from project root: python run_cli.py compare --out results
"""

import sys
import os

# Add project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

# Load environment variables (SIRSV_CONFIG, SIRSV_OUT, SIRSV_WORKERS) from .env
from dotenv import load_dotenv
load_dotenv()

from app.main import main

if __name__ == "__main__":
    sys.exit(main())
