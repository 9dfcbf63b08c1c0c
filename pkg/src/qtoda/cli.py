"""Command-line front end: series dumps and verification reports.

Every command prints one canonical JSON document on standard output (or to
--output); progress and human-readable summaries go to standard error so
the JSON stream stays clean. Exit codes: 0 pass, 1 verification failure,
2 usage or internal error.
"""

import functools
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import click

from gmpy2 import mpq

from .characters import (
	CharSpec,
	char_bosonic,
	char_fermionic,
	convolution_report,
	lemma_dj_report,
	product_check,
	quasi_classical_report,
	sum_j_one_infty,
)
from .fermionic import fermionic_sum, fermionic_sum_series, shift_check
from .multivar import (
	FactoredExpr,
	TermSum,
	TruncSpec,
	canonical_json,
	expand_termsum,
	termsum_equal_report,
)
from .rootdata import iter_up_to_degree
from .toda import toda_solve, verify_eigen
from .whittaker import jd_explicit, scalar_product_J, verify_whittaker_identity


def _emit(obj, output):
	text = canonical_json(obj)
	if output:
		with open(output, "w") as fh:
			fh.write(text + "\n")
		click.echo(f"wrote {output}", err=True)
	else:
		click.echo(text)


def _parse_vec(s, n, what):
	parts = [p for p in s.split(",") if p != ""]
	try:
		vec = tuple(int(p) for p in parts)
	except ValueError:
		raise click.UsageError(f"{what} must be comma-separated integers")
	if len(vec) != n:
		raise click.UsageError(f"{what} needs {n} entries, got {len(vec)}")
	return vec


def _parse_window(s, n):
	parts = s.split(",")
	if len(parts) != 3:
		raise click.UsageError("window must be D,vmin,vmax")
	try:
		d, lo, hi = (int(p) for p in parts)
	except ValueError:
		raise click.UsageError("window must be D,vmin,vmax with integers")
	return TruncSpec(n, d, (lo, hi))


def _spec_list(spec):
	return [spec.max_z_degree, spec.v_lo, spec.v_hi]


def _guard(fn):
	"""Map internal exceptions to exit 2, keeping usage errors intact."""

	@functools.wraps(fn)
	def wrapped(*args, **kwargs):
		try:
			return fn(*args, **kwargs)
		except (click.ClickException, click.Abort):
			raise
		except Exception as exc:
			click.echo(f"error: {exc}", err=True)
			sys.exit(2)

	return wrapped


def _whittaker_negative_control():
	"""The bracket sum with the exponent sign flipped must miss 1."""
	v0 = mpq(2)
	a = [5]
	b = [2, 3]

	def br(x):
		return (v0 ** x - v0 ** -x) / (v0 - 1 / v0)

	total = mpq(0)
	for l in range(2):
		other = b[1 - l]
		total += br(a[0] - b[l]) / br(other - b[l]) * v0 ** (sum(a) + other)
	return total != 1


def _default_workers():
	try:
		return max(1, int(os.environ.get("QTODA_WORKERS", "1")))
	except ValueError:
		return 1


@click.group()
def main():
	"""Exact q-series engine: scalar products, interval sums, characters."""


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--d", "dvec", required=True, help="degree vector d1,..,dn")
@click.option("--json", "as_json", is_flag=True, default=True)
@click.option("--output", default=None, type=click.Path(dir_okay=False))
@_guard
def jd(n, dvec, as_json, output):
	"""Scalar product term J_d as factored-term JSON."""
	d = _parse_vec(dvec, n, "--d")
	_emit(jd_explicit(n, d).to_json_obj(), output)


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--d", "dvec", required=True, help="degree vector d1,..,dn")
@click.option("--interval", required=True, help="r:s or r:inf")
@click.option("--window", required=True, help="D,vmin,vmax")
@click.option("--json", "as_json", is_flag=True, default=True)
@click.option("--output", default=None, type=click.Path(dir_okay=False))
@_guard
def fermi(n, dvec, interval, window, as_json, output):
	"""Interval sum over [r,s] or [r,inf) as truncated-series JSON."""
	d = _parse_vec(dvec, n, "--d")
	spec = _parse_window(window, n)
	parts = interval.split(":")
	if len(parts) != 2:
		raise click.UsageError("interval must be r:s or r:inf")
	try:
		r = int(parts[0])
	except ValueError:
		raise click.UsageError("interval start must be an integer")
	if parts[1] == "inf":
		ser = fermionic_sum_series(n, d, r, spec)
	else:
		try:
			s = int(parts[1])
		except ValueError:
			raise click.UsageError("interval end must be an integer or inf")
		ser = expand_termsum(fermionic_sum(n, d, r, s), spec)
	_emit(ser.to_json_obj(), output)


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, required=True)
@click.option("--method", type=click.Choice(["fermionic", "bosonic"]), required=True)
@click.option("--window", required=True, help="D,vmin,vmax")
@click.option("--json", "as_json", is_flag=True, default=True)
@click.option("--output", default=None, type=click.Path(dir_okay=False))
@_guard
def char(n, k, method, window, as_json, output):
	"""Principal subspace character by either route."""
	spec = CharSpec(n, k, _parse_window(window, n))
	t0 = time.time()
	ser = char_fermionic(spec) if method == "fermionic" else char_bosonic(spec)
	click.echo(f"char {method} n={n} k={k}: {time.time()-t0:.2f}s", err=True)
	_emit(ser.to_json_obj(), output)


@main.command(name="toda-verify")
@click.option("--n", type=int, required=True)
@click.option("--cutoff", type=int, required=True)
@click.option(
	"--source", type=click.Choice(["gz", "explicit", "solve"]), default="explicit"
)
@click.option("--trials", type=int, default=4)
@click.option("--seed", type=int, default=0)
@click.option("--json", "as_json", is_flag=True, default=True)
@click.option("--output", default=None, type=click.Path(dir_okay=False))
@_guard
def toda_verify(n, cutoff, source, trials, seed, as_json, output):
	"""Eigen-equation check for the difference Toda Hamiltonian."""
	jsource = {
		"gz": scalar_product_J,
		"explicit": jd_explicit,
		"solve": toda_solve,
	}[source]
	rep = verify_eigen(n, cutoff, jsource, trials=trials, seed=seed)
	rep["source"] = source
	rep["seed"] = seed
	_emit(rep, output)
	sys.exit(0 if rep["pass"] else 1)


_IDENTITIES = (
	"toda",
	"prop24",
	"theorem31",
	"shift",
	"convolution",
	"sumJ1inf",
	"lemma43",
	"theorem44",
)


def _run_identity(identity, n, k, dvec, r, s, boundaries, cutoff, window, seed, trials):
	"""Dispatch one identity check; returns the uniform report dict."""
	params = {"n": n}
	witness = None
	bounds = {}
	if identity == "toda":
		if cutoff is None:
			raise click.UsageError("toda needs --cutoff")
		params.update({"cutoff": cutoff, "seed": seed, "trials": trials})
		rep = verify_eigen(n, cutoff, jd_explicit, trials=trials, seed=seed)
		ok = rep["pass"]
		bad = [c for c in rep["checks"] if not c["pass"]]
		witness = bad[0] if bad else None
		bounds = {"degrees_checked": len(rep["checks"])}
	elif identity == "prop24":
		d = _parse_vec(dvec, n, "--d") if dvec else (0,) * n
		spec = window or TruncSpec(n, 4, (-20, 60))
		params.update({"d": list(d), "window": _spec_list(spec)})
		lhs = fermionic_sum_series(n, d, 0, spec)
		rhs = expand_termsum(jd_explicit(n, d), spec)
		diff = lhs.diff(rhs, 1)
		ok = not diff
		if diff:
			mono, p, ca, cb = diff[0]
			witness = {"z": list(mono), "v_power": p, "lhs": str(ca), "rhs": str(cb)}
		bounds = {"exact": True}
	elif identity == "theorem31":
		if k is None:
			raise click.UsageError("theorem31 needs --k")
		spec = window or TruncSpec(n, 4 if n < 3 else 3, (-20, 60))
		params.update({"k": k, "window": _spec_list(spec)})
		lhs = char_fermionic(CharSpec(n, k, spec))
		rhs = char_bosonic(CharSpec(n, k, spec))
		diff = lhs.diff(rhs, 1)
		ok = not diff
		if diff:
			mono, p, ca, cb = diff[0]
			witness = {"z": list(mono), "v_power": p, "lhs": str(ca), "rhs": str(cb)}
		bounds = {"exact": True}
	elif identity == "shift":
		d = _parse_vec(dvec, n, "--d") if dvec else (1,) * n
		r0 = r if r is not None else 0
		s0 = s if s is not None else r0 + 2
		params.update(
			{"beta": list(d), "r": r0, "s": s0, "seed": seed, "trials": trials}
		)
		ok = shift_check(n, d, r0, s0, trials=trials, seed=seed)
		bounds = {"trials": trials}
	elif identity == "convolution":
		if k is None:
			raise click.UsageError("convolution needs --k")
		d = _parse_vec(dvec, n, "--d") if dvec else (1,) * n
		spec = window or TruncSpec(n, 3, (-20, 40))
		params.update({"k": k, "beta": list(d), "window": _spec_list(spec)})
		rep = convolution_report(n, k, d, spec)
		ok = rep["pass"]
		witness = rep["witness"]
		bounds = rep["truncation_bounds"]
	elif identity == "sumJ1inf":
		spec = window or TruncSpec(n, 4, (0, 40))
		params.update({"window": _spec_list(spec)})
		lhs = sum_j_one_infty(n, spec)
		ok = product_check(n, spec)
		bounds = {"exact": True, "monomials": len(lhs.data)}
	elif identity == "lemma43":
		if dvec is None:
			raise click.UsageError("lemma43 needs --d (gamma)")
		gamma = _parse_vec(dvec, n, "--d")
		r0 = r if r is not None else 0
		spec = window or TruncSpec(n, 3, (-30, 40))
		params.update({"gamma": list(gamma), "r": r0, "window": _spec_list(spec)})
		rep = lemma_dj_report(n, r0, gamma, spec)
		ok = rep["pass"]
		witness = rep["witness"]
		bounds = rep["truncation_bounds"]
	elif identity == "theorem44":
		if boundaries is None:
			raise click.UsageError("theorem44 needs --boundaries")
		bnds = _parse_vec(boundaries, n, "--boundaries")
		d = _parse_vec(dvec, n, "--d") if dvec else (1,) * n
		spec = window or TruncSpec(n, 3, (-30, 40))
		params.update(
			{"boundaries": list(bnds), "beta": list(d), "window": _spec_list(spec)}
		)
		rep = quasi_classical_report(n, bnds, d, spec)
		ok = rep["pass"]
		witness = rep["witness"]
		bounds = rep["truncation_bounds"]
	elif identity == "closedforms":
		dmax = int(dvec) if dvec else 5
		params.update({"dmax": dmax, "seed": seed})
		ok = True
		checked = 0
		for d1 in range(dmax + 1):
			want = FactoredExpr(1, den=[(1, (0,), d1), (1, (1,), d1)])
			rep = termsum_equal_report(
				jd_explicit(1, (d1,)), TermSum(want.rank, (want,)), seed=seed + d1, trials=12
			)
			checked += 1
			if not rep["equal"]:
				ok = False
				witness = {"n": 1, "d": [d1], "point": rep["witness"]}
				break
		if ok:
			for d1 in range(dmax + 1):
				for d2 in range(dmax + 1):
					want = FactoredExpr(
						2,
						num=[(1, (1, 1), d1 + d2)],
						den=[
							(1, (0, 0), d1),
							(1, (0, 0), d2),
							(1, (1, 0), d1),
							(1, (0, 1), d2),
							(1, (1, 1), d1),
							(1, (1, 1), d2),
						],
					)
					rep = termsum_equal_report(
						jd_explicit(2, (d1, d2)),
						TermSum(want.rank, (want,)),
						seed=seed + 7 * d1 + 13 * d2,
						trials=12,
					)
					checked += 1
					if not rep["equal"]:
						ok = False
						witness = {"n": 2, "d": [d1, d2], "point": rep["witness"]}
						break
				if not ok:
					break
		bounds = {"pairs_checked": checked, "trials": 12}
	elif identity in ("routes", "todasolve"):
		dmax = int(dvec) if dvec else 4
		other = scalar_product_J if identity == "routes" else toda_solve
		params.update({"dmax": dmax, "seed": seed})
		ok = True
		checked = 0
		for d in iter_up_to_degree(n, dmax):
			rep = termsum_equal_report(
				other(n, d), jd_explicit(n, d),
				seed=seed + sum(x * (i + 3) for i, x in enumerate(d)),
				trials=trials,
			)
			checked += 1
			if not rep["equal"]:
				ok = False
				witness = {"d": list(d), "point": rep["witness"]}
				break
		bounds = {"degrees_checked": checked, "trials": trials}
	elif identity == "whittaker":
		import random as _random

		params.update({"seed": seed, "specializations": 20})
		rng = _random.Random(seed + 33)
		ok = True
		for i in range(1, 5):
			for _ in range(20):
				a = [rng.randint(-6, 9) for _ in range(i)]
				b = rng.sample(range(-8, 12), i + 1)
				v0 = mpq(rng.randint(2, 5), rng.choice([1, 7]))
				if not verify_whittaker_identity(i, a, b, v0=v0):
					ok = False
					witness = {"i": i, "a": a, "b": b, "v0": str(v0)}
					break
			if not ok:
				break
		if ok and not _whittaker_negative_control():
			ok = False
			witness = {"negative_control": "flipped exponent matched 1"}
		bounds = {"i_range": [1, 4], "negative_control": True}
	elif identity == "positivity":
		if k is None:
			raise click.UsageError("positivity needs --k")
		spec = window or TruncSpec(n, 4 if n < 3 else 3, (0, 60))
		params.update({"k": k, "window": _spec_list(spec)})
		ser = char_fermionic(CharSpec(n, k, spec))
		ok = True
		for mono, cmap in sorted(ser.data.items()):
			for p, c in sorted(cmap.items()):
				if p < 0 or c <= 0:
					ok = False
					witness = {"z": list(mono), "v_power": p, "coeff": str(c)}
					break
			if not ok:
				break
		bounds = {"monomials": len(ser.data)}
	elif identity == "prop24all":
		dmax = int(dvec) if dvec else 4
		spec = window or TruncSpec(n, 4, (-20, 60))
		params.update({"dmax": dmax, "window": _spec_list(spec)})
		ok = True
		checked = 0
		for d in iter_up_to_degree(n, dmax):
			lhs = fermionic_sum_series(n, d, 0, spec)
			rhs = expand_termsum(jd_explicit(n, d), spec)
			diff = lhs.diff(rhs, 1)
			checked += 1
			if diff:
				ok = False
				mono, p, ca, cb = diff[0]
				witness = {
					"d": list(d), "z": list(mono), "v_power": p,
					"lhs": str(ca), "rhs": str(cb),
				}
				break
		bounds = {"exact": True, "degrees_checked": checked}
	elif identity == "shiftsets":
		params.update({"seed": seed, "trials": trials})
		sets = (
			(1, (1,), 0, 2), (1, (2,), -1, 1), (1, (3,), 1, 4),
			(1, (2,), -2, 0), (2, (1, 0), 0, 2), (2, (0, 1), -1, 2),
			(2, (1, 1), 0, 3), (2, (1, 2), -1, 1), (2, (2, 1), -2, 1),
			(2, (2, 2), 0, 2),
		)
		ok = True
		for nn, beta, r0, s0 in sets:
			if not shift_check(nn, beta, r0, s0, trials=trials, seed=seed):
				ok = False
				witness = {"n": nn, "beta": list(beta), "r": r0, "s": s0}
				break
		bounds = {"sets": len(sets), "trials": trials}
	elif identity == "convsweep":
		spec = window or TruncSpec(n, 3, (-20, 40))
		params.update({"window": _spec_list(spec)})
		if n == 1:
			betas = [(0,), (1,), (2,)]
		else:
			betas = [
				(b1, b2) for b1 in range(2) for b2 in range(3)
			]
		ok = True
		checked = 0
		for kk in (1, 2):
			for beta in betas:
				rep = convolution_report(n, kk, beta, spec)
				checked += 1
				if not rep["pass"]:
					ok = False
					witness = {"k": kk, "beta": list(beta), "at": rep["witness"]}
					break
			if not ok:
				break
		bounds = {"exact": True, "cases": checked}
	elif identity == "quasisweep":
		spec = window or TruncSpec(n, 3, (-30, 40))
		params.update({"window": _spec_list(spec)})
		if n != 2:
			raise click.UsageError("quasisweep sweeps the rank-2 grid")
		bvals = (-2, -1, 0)
		ok = True
		checked = 0
		for r1 in bvals:
			for r2 in bvals:
				if r1 > r2:
					continue
				for b1 in range(3):
					for b2 in range(3):
						rep = quasi_classical_report(2, (r1, r2), (b1, b2), spec)
						checked += 1
						if not rep["pass"]:
							ok = False
							witness = {
								"boundaries": [r1, r2], "beta": [b1, b2],
								"at": rep["witness"],
							}
							break
					if not ok:
						break
				if not ok:
					break
			if not ok:
				break
		bounds = {"exact": True, "cases": checked}
	else:
		raise click.UsageError(f"unknown identity {identity}")
	return {
		"identity": identity,
		"params": params,
		"pass": ok,
		"witness": witness,
		"truncation_bounds": bounds,
	}


@main.command()
@click.option("--identity", type=click.Choice(_IDENTITIES), required=True)
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, default=None)
@click.option("--d", "dvec", default=None, help="degree/root vector")
@click.option("--r", type=int, default=None)
@click.option("--s", type=int, default=None)
@click.option("--boundaries", default=None, help="r1,..,rn")
@click.option("--cutoff", type=int, default=None)
@click.option("--window", default=None, help="D,vmin,vmax")
@click.option("--seed", type=int, default=0)
@click.option("--trials", type=int, default=6)
@click.option("--json", "as_json", is_flag=True, default=True)
@click.option("--output", default=None, type=click.Path(dir_okay=False))
@_guard
def verify(identity, n, k, dvec, r, s, boundaries, cutoff, window, seed,
		trials, as_json, output):
	"""Verify one identity; exit 0 on pass, 1 on fail."""
	spec = _parse_window(window, n) if window else None
	t0 = time.time()
	rep = _run_identity(
		identity, n, k, dvec, r, s, boundaries, cutoff, spec, seed, trials
	)
	click.echo(
		f"{identity}: {'PASS' if rep['pass'] else 'FAIL'} "
		f"({time.time()-t0:.2f}s)",
		err=True,
	)
	_emit(rep, output)
	sys.exit(0 if rep["pass"] else 1)


def _suite_rows(profile):
	"""Acceptance matrix rows (label, kind, kwargs). The quick profile
	keeps the rank <= 2 rows; full runs everything at stated scale."""
	rows = []
	rows.append(("1 closed forms d<=5", "closedforms", dict(n=2, dvec="5")))
	rows.append(("2 route equality n=1", "routes", dict(n=1, dvec="4")))
	rows.append(("2 route equality n=2", "routes", dict(n=2, dvec="4")))
	rows.append(("3 toda eigen n=1 c=5", "toda", dict(n=1, cutoff=5)))
	rows.append(("3 toda eigen n=2 c=5", "toda", dict(n=2, cutoff=5)))
	rows.append(("3 toda solve n=1", "todasolve", dict(n=1, dvec="4")))
	rows.append(("3 toda solve n=2", "todasolve", dict(n=2, dvec="4")))
	rows.append(("4 interval sum n=1", "prop24all", dict(n=1, dvec="4")))
	rows.append(("4 interval sum n=2", "prop24all", dict(n=2, dvec="4")))
	rows.append(("5 char routes n=1 k=1", "theorem31", dict(n=1, k=1)))
	rows.append(("5 char routes n=1 k=2", "theorem31", dict(n=1, k=2)))
	rows.append(("5 char routes n=1 k=3", "theorem31", dict(n=1, k=3)))
	rows.append(("5 char routes n=2 k=1", "theorem31", dict(n=2, k=1)))
	rows.append(("5 char routes n=2 k=2", "theorem31", dict(n=2, k=2)))
	rows.append(("6 shift invariance", "shiftsets", dict(n=2)))
	rows.append(("6 convolution n=1", "convsweep", dict(n=1)))
	rows.append(("6 convolution n=2", "convsweep", dict(n=2)))
	rows.append(("6 sum J [1,inf) n=1", "sumJ1inf", dict(n=1)))
	rows.append(("6 sum J [1,inf) n=2", "sumJ1inf", dict(n=2)))
	for gl, gv in (("a2", "0,1"), ("a1+a2", "1,1"), ("a1+2a2", "1,2")):
		for r0 in (-1, 0):
			rows.append(
				(f"7 tower level g={gl} r={r0}", "lemma43",
					dict(n=2, dvec=gv, r=r0))
			)
	rows.append(("7 quasi-classical grid n=2", "quasisweep", dict(n=2)))
	rows.append(("8 whittaker recursion", "whittaker", dict(n=1)))
	rows.append(("9 positivity n=1 k=2", "positivity", dict(n=1, k=2)))
	rows.append(("9 positivity n=2 k=1", "positivity", dict(n=2, k=1)))
	if profile == "full":
		rows.append(("2 route equality n=3", "routes", dict(n=3, dvec="4")))
		rows.append(("3 toda eigen n=3 c=4", "toda", dict(n=3, cutoff=4)))
		rows.append(("3 toda solve n=3", "todasolve", dict(n=3, dvec="4")))
		rows.append(("4 interval sum n=3", "prop24all", dict(n=3, dvec="4")))
		rows.append(("5 char routes n=3 k=1", "theorem31", dict(n=3, k=1)))
		rows.append(
			("7 quasi-classical n=3 smoke", "theorem44",
				dict(n=3, dvec="1,1,1", boundaries="-1,0,0"))
		)
		rows.append(("9 positivity n=3 k=1", "positivity", dict(n=3, k=1)))
		rows.sort(key=lambda r: r[0])
	return rows


def _suite_one(args):
	label, identity, kw = args
	t0 = time.time()
	rep = _run_identity(
		identity,
		kw.get("n"),
		kw.get("k"),
		kw.get("dvec"),
		kw.get("r"),
		kw.get("s"),
		kw.get("boundaries"),
		kw.get("cutoff"),
		None,
		kw.get("seed", 0),
		kw.get("trials", 6),
	)
	rep["label"] = label
	rep["seconds"] = round(time.time() - t0, 2)
	return rep


@main.command()
@click.argument("profile", type=click.Choice(["quick", "full"]))
@click.option("--workers", type=int, default=None)
@click.option("--output", default=None, type=click.Path(dir_okay=False))
@_guard
def suite(profile, workers, output):
	"""Run the verification matrix; nonzero exit on any failure."""
	rows = _suite_rows(profile)
	nworkers = workers if workers is not None else _default_workers()
	t0 = time.time()
	if nworkers > 1:
		with ProcessPoolExecutor(max_workers=nworkers) as pool:
			reports = list(pool.map(_suite_one, rows))
	else:
		reports = []
		for row in rows:
			click.echo(f"running {row[0]} ...", err=True)
			reports.append(_suite_one(row))
	ok = all(r["pass"] for r in reports)
	width = max(len(r["label"]) for r in reports)
	for r in reports:
		click.echo(
			f"{r['label']:<{width}}  {'PASS' if r['pass'] else 'FAIL'}"
			f"  {r.pop('seconds'):7.2f}s",
			err=True,
		)
	click.echo(
		f"suite {profile}: {sum(r['pass'] for r in reports)}/{len(reports)} "
		f"passed in {time.time()-t0:.1f}s",
		err=True,
	)
	# wall-clock fields stay on stderr so the artifact is byte-stable
	_emit(
		{
			"profile": profile,
			"pass": ok,
			"rows": reports,
		},
		output,
	)
	sys.exit(0 if ok else 1)


if __name__ == "__main__":
	main()
