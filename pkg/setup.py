import json
import os

# Use setuptools compulsorily, as the distutils doesn't work out well for the
# installation procedure. The 'install_requires' and 'package_data' have better
# support in setuptools.
from setuptools import setup

with open(os.path.join("zenolab", "info.json")) as infofile:
    infodict = json.load(infofile)

VERSION = infodict["VERSION"]
AUTHOR = infodict["AUTHOR"]
CONTACT = infodict["CONTACT"]
HOMEPAGE = infodict["HOMEPAGE"]
CLASSIFIERS = infodict["CLASSIFIERS"]

README = "README.md"
with open(README) as f:
    description_text = f.read()

packages = [
    "zenolab"
]

install_req = [
    "numpy>=1.20",
    "scipy>=1.7",
    "odml>=1.4.4",
    "pyyaml>=5.1",
    "pydantic>=2.0",
    "pandas>=1.3"
]

setup(
    name="zeno-lab",
    version=VERSION,
    description="Quantum Zeno and anti-Zeno simulations of a qubit in a Lorentzian bath",
    author=AUTHOR,
    author_email=CONTACT,
    url=HOMEPAGE,
    packages=packages,
    test_suite="test",
    install_requires=install_req,
    include_package_data=True,
    package_data={"zenolab": ["info.json"]},
    long_description=description_text,
    long_description_content_type="text/markdown",
    classifiers=CLASSIFIERS,
    python_requires=">=3.8",
    license="BSD",
    entry_points={"console_scripts": ["zeno-lab = zenolab.__main__:run"]}
)
