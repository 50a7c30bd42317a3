from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "feedermarket._core",
    [
        "src/econ.cpp",
        "src/scenario.cpp",
        "src/clearing.cpp",
        "src/oracle.cpp",
        "src/results.cpp",
        "src/runtime.cpp",
        "src/python/bindings.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
