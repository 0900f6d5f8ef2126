"""
Local entry point
Usage: python app.py <test|select-h|simulate|bench> [options]
Same as: python -m kbqd ...
"""
import sys

from kbqd.cli import main

if __name__ == '__main__':
    sys.exit(main())
