"""
Unit tests for the command line runner.
"""

import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

from cli_runner import cutoff_for, format_complex, parse_complex, parse_modes, run_command
from dirac_bloch import FourierPotential
from file_operations import RunConfig
from lattice_moduli import square_lattice

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'


class ParsingTests(unittest.TestCase):
    """Argument helpers"""

    def testComplex(self):
        """Both i and j suffixes are accepted"""
        self.assertEqual(parse_complex("5+0.3i"), 5 + 0.3j)
        self.assertEqual(parse_complex("i"), 1j)
        self.assertEqual(parse_complex("-0.5"), -0.5)
        self.assertEqual(parse_complex("1+2j"), 1 + 2j)

    def testModes(self):
        """'1,0;0,1' lists two modes"""
        self.assertEqual(parse_modes("1,0;0,1"), [(1, 0), (0, 1)])

    def testFormat(self):
        """Six decimals, zero parts dropped"""
        self.assertEqual(format_complex(1j / 0.3), "3.333333i")
        self.assertEqual(format_complex(0.5 + 1j), "0.500000+1.000000i")
        self.assertEqual(format_complex(2.0), "2.000000")

    def testCutoffRaisedToSupport(self):
        """A cutoff below the potential support is raised per direction"""
        pot = FourierPotential.eta_pair({(3, 0): 0.1})
        self.assertEqual(cutoff_for(RunConfig(square_lattice(), pot, cutoff=2)), (3, 2))
        self.assertEqual(cutoff_for(RunConfig(square_lattice(), pot, cutoff=(5, 1))), (5, 1))


class CommandTests(unittest.TestCase):
    """Subcommands end to end"""
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _run(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = run_command(list(argv) + ['--out', str(self.out)])
        return code, stdout.getvalue(), stderr.getvalue()

    def testTauReduce(self):
        """5 + 0.3i reduces to 3.333333i"""
        code, stdout, _ = self._run('tau', 'reduce', '--tau', '5+0.3i')
        self.assertEqual(code, 0)
        self.assertEqual(stdout.splitlines()[0], "3.333333i")

    def testTauSublattice(self):
        """The square torus falls in case 3e for the class (1,1)"""
        code, stdout, _ = self._run('tau', 'sublattice', '--tau', 'i')
        self.assertEqual(code, 0)
        self.assertIn("3e", stdout)

    def testSingtable(self):
        """singtable writes its CSV"""
        code, _, _ = self._run('singtable', '--max', '3')
        self.assertEqual(code, 0)
        lines = (self.out / 'singtable.csv').read_text().splitlines()
        self.assertEqual(lines[0], "W_sing,m=1")
        self.assertEqual(lines[1], "4pi,\"-1,0\"")
        self.assertEqual(len(lines), 4)

    def testFermiSlice(self):
        """A free slice has 2 (2K + 1)^2 rows"""
        code, _, _ = self._run('fermi-slice', '--config', str(CONFIG_DIR / 'free.json'), '--cutoff', '1',
                               '--xp', '0.3')
        self.assertEqual(code, 0)
        lines = (self.out / 'fermi_slice.csv').read_text().splitlines()
        self.assertEqual(lines[0], "xp_re,xp_im,yp_re,yp_im,n1,n2")
        self.assertEqual(len(lines), 1 + 18)

    def testWillmorePairing(self):
        """The pairing of the constant config is 2 pi^2"""
        code, stdout, _ = self._run('willmore', '--config', str(CONFIG_DIR / 'constant.json'),
                                    '--methods', 'pairing')
        self.assertEqual(code, 0)
        self.assertIn("pairing: 19.7392088022", stdout)

    def testDomainError(self):
        """A modulus in the lower half plane gives exit 1 and a JSON record"""
        code, _, stderr = self._run('tau', 'reduce', '--tau=0.2-1i')
        self.assertEqual(code, 1)
        record = json.loads(stderr.strip().splitlines()[-1])
        self.assertEqual(record["error"], "ModularDomainError")

    def testMissingConfig(self):
        """A missing config file is reported the same way"""
        code, _, stderr = self._run('singtable', '--config', str(self.out / 'absent.json'))
        self.assertEqual(code, 1)
        self.assertEqual(json.loads(stderr.strip().splitlines()[-1])["error"], "FileNotFoundError")

    def testUnknownMethod(self):
        """Unknown Willmore methods are configuration errors"""
        code, _, stderr = self._run('willmore', '--methods', 'pairing,guess')
        self.assertEqual(code, 1)
        record = json.loads(stderr.strip().splitlines()[-1])
        self.assertEqual(record["error"], "ConfigError")
        self.assertEqual(record["errors"], ["--methods: unknown method 'guess'"])


if __name__ == '__main__':
    unittest.main()
