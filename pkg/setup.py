import sys
from setuptools import setup


if sys.version_info[:2] < (3, 9):
    error = (
        f"pulsefield requires Python 3.9 or later ({sys.version_info[0]}.{sys.version_info[1]} detected)."
    )
    sys.stderr.write(error + "\n")
    sys.exit(1)

name = "pulsefield"
description = "Self-stabilizing pulse synchronization with discrete mean-field feedback: " \
              "protocol, adversary, discrete-event simulator and curve-game experiments"
authors = {
    "pulsefield": ("pulsefield developers", ""),
}
platforms = ["Linux"]
keywords = [
    "pulsefield",
    "Pulse synchronization",
    "Self-stabilization",
    "Byzantine fault tolerance",
    "Discrete-event simulation",
]
classifiers = [
    "Development Status :: 2 - Pre-Alpha",
    "Intended Audience :: Education",
    "Intended Audience :: Science/Research",
    "Operating System :: POSIX :: Linux",
    "Programming Language :: Python :: 3",
    "Programming Language :: Python :: 3.9",
    "Programming Language :: Python :: 3.10",
    "Programming Language :: Python :: 3.11",
    "Programming Language :: Python :: 3.12",
    "Programming Language :: Python :: 3 :: Only",
    "Topic :: Software Development :: Libraries :: Python Modules",
    "Topic :: System :: Distributed Computing",
    "Topic :: Scientific/Engineering :: Mathematics",
]

with open("pulsefield/__init__.py") as fid:
    for line in fid:
        if line.startswith("__version__"):
            version = line.strip().split()[-1][1:-1]
            break

packages = [
    "pulsefield",               # since 0.1.0
    "pulsefield.interfaces",    # since 0.1.0
    "pulsefield.protocol",      # since 0.1.0
    "pulsefield.sim",           # since 0.1.0
    "pulsefield.curve",         # since 0.1.0
]

install_requires = [
    "numpy>=1.22",
    "networkx>=2.8",
    "tqdm>=4.60",
    "pydantic>=2.0",
]

extras_require = {
    "test": ["pytest>=7.0", "hypothesis>=6.0", "scipy>=1.8"],
}

with open("README.md") as fh:
    long_description = fh.read()

if __name__ == "__main__":

    setup(
        name=name,
        version=version,
        author=authors["pulsefield"][0],
        author_email=authors["pulsefield"][1],
        description=description,
        keywords=keywords,
        long_description=long_description,
        long_description_content_type="text/markdown",
        platforms=platforms,
        classifiers=classifiers,
        packages=packages,
        install_requires=install_requires,
        extras_require=extras_require,
        entry_points={"console_scripts": ["pulsefield=pulsefield.cli:main"]},
        python_requires=">=3.9",
        zip_safe=False,
    )
