import contextlib
import io
import os
import shutil
import sys
import tempfile
import unittest
import warnings

import numpy as np

import shrinkmeta
from shrinkmeta.op.effect_ingest import Dataset, Study
from shrinkmeta.utils.command_registry import CommandRegistry


LONG_TESTS_ENV = "SHRINKMETA_LONG_TESTS"


def long_tests_enabled():
    return os.environ.get(LONG_TESTS_ENV) == "true"


def command_exists(idname):
    try:
        CommandRegistry.get(idname)
        return True
    except KeyError:
        return False


def property_exists(name):
    return name in shrinkmeta.properties.new_config().definitions()


def make_dataset(y, sigma, target=None, labels=None):
    if labels is None:
        labels = ["s{}".format(i + 1) for i in range(len(y))]
    return Dataset(tuple(Study(labels[i], float(y[i]), float(sigma[i]),
                               is_target=(i == target))
                         for i in range(len(y))))


def random_dataset(rng, k, target=None):
    y = rng.normal(0.5, 1.0, k)
    sigma = np.exp(rng.uniform(np.log(0.1), np.log(1.0), k))
    return make_dataset(y, sigma, target)


# external studies plus the target study in the last row
MV_LIKE_CSV = """label,y,se,estimate,ci_lower,ci_upper,a,b,c,d,target
cheng,2.10,0.35,,,,,,,,0
hirsch,2.62,0.12,,,,,,,,0
mohamed,1.35,0.52,,,,,,,,0
chan,2.95,0.28,,,,,,,,0
xu,1.20,0.60,,,,,,,,0
hardenberg,,,3.488,2.686,4.289,,,,,1
"""


class TempDirMixin:
    def make_tempdir(self):
        path = tempfile.mkdtemp(prefix="shrinkmeta-test-")
        self.addCleanup(shutil.rmtree, path, ignore_errors=True)
        return path

    def write_file(self, directory, name, text):
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def write_bytes(self, directory, name, data):
        path = os.path.join(directory, name)
        with open(path, "wb") as f:
            f.write(data)
        return path


@contextlib.contextmanager
def captured_output():
    out, err = io.StringIO(), io.StringIO()
    old_out, old_err = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        yield out, err
    finally:
        sys.stdout, sys.stderr = old_out, old_err


@contextlib.contextmanager
def no_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", shrinkmeta.common.ShrinkmetaWarning)
        yield


class TestBase(unittest.TestCase):

    package_name = "shrinkmeta"
    module_name = ""
    submodule_name = None
    idname = []

    @classmethod
    def setUpClass(cls):
        if cls.submodule_name is not None:
            print("\n======== Module Test: {}.{} ({}) ========"
                  .format(cls.package_name, cls.module_name,
                          cls.submodule_name))
        else:
            print("\n======== Module Test: {}.{} ========"
                  .format(cls.package_name, cls.module_name))
        for kind, name in cls.idname:
            if kind == 'COMMAND':
                assert command_exists(name), \
                    "Command {} does not exist".format(name)
            elif kind == 'PROPERTY':
                assert property_exists(name), \
                    "Property {} does not exist".format(name)

    def setUp(self):
        self.setUpEachMethod()

    def setUpEachMethod(self):
        pass

    def tearDown(self):
        self.tearDownEachMethod()

    def tearDownEachMethod(self):
        pass
