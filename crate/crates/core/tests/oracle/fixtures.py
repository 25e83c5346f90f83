"""Arbitrary-precision oracle for the frozen fixture values in the Rust tests.

Run with `python3 fixtures.py`; prints every value at 17 significant digits.
"""
from mpmath import mp, mpf, ncdf, npdf, erfinv, sqrt, findroot, ceil

mp.dps = 40


def cdf(z):
    return ncdf(mpf(z))


def quantile(p):
    return sqrt(2) * erfinv(2 * mpf(p) - 1)


def rep(effect, sd, n, k, alpha):
    sem = mpf(sd) / sqrt(n)
    return cdf(mpf(effect) / (sem * sqrt(k)) + quantile(alpha))


def raw_n(effect, sd, alpha, power, k):
    return k * (mpf(sd) * (quantile(power) - quantile(alpha)) / mpf(effect)) ** 2


def show(label, v):
    print(f"{label:50s} {mp.nstr(v, 17)}")


show("cdf(1.96)", cdf("1.96"))
show("cdf(-2)", cdf(-2))
show("cdf(0.2)", cdf("0.2"))
show("cdf(1.2)", cdf("1.2"))
show("cdf(-8)", cdf(-8))
show("cdf(-5)", cdf(-5))
show("cdf(-37)", cdf(-37))
show("quantile(0.025)", quantile("0.025"))
show("quantile(0.8)", quantile("0.8"))
show("quantile(1e-10)", quantile("1e-10"))
show("pdf(2)", npdf(2))
show("pdf(0)", npdf(0))
show("sem(204,10)", 10 / sqrt(204))
show("sem(404,10)", 10 / sqrt(404))
show("beyond(2,1,0)", cdf(2))
show("beyond(1.96,1,1)", cdf("0.96"))
show("within(2,1,[0,3.96])", cdf("1.96") - cdf(-2))
show("within(2,1,[1,3])", cdf(1) - cdf(-1))
q975 = quantile("0.975")
show("ci95 lower (2,1)", 2 - q975)
show("ci95 upper (2,1)", 2 + q975)
sem613 = mpf(11) / sqrt(613)
show("ci95 lower (1.76, 11/sqrt613)", mpf("1.76") - q975 * sem613)
show("ci95 upper (1.76, 11/sqrt613)", mpf("1.76") + q975 * sem613)
for args, lab in [
    (("1.96", 10, 100, 2, "0.025"), "eq1"),
    (("1.96", 10, 100, 2, "0.003824"), "eq2"),
    (("1.96", 10, 404, 2, "0.025"), "eq3"),
    (("1.96", 10, 204, 2, "0.025"), "eq6"),
    (("1.96", 10, 603, 2, "0.025"), "eq8"),
    (("1.96", 10, 613, 3, "0.025"), "eq9"),
    (("1.96", 10, 603, 3, "0.025"), "eq9 at 603"),
    (("2.2", 10, 163, 3, "0.025"), "eq11"),
    (("2.2", 10, 489, 3, "0.025"), "eq12"),
    (("1.96", 10, 409, 2, "0.025"), "power at 409"),
    (("1.96", 10, 205, 1, "0.025"), "power at 205 k1"),
]:
    show("rep " + lab, rep(*args))
for args, lab in [
    (("1.96", 10, "0.025", "0.8", 1), "eq5"),
    (("1.96", 10, "0.025", "0.8", 2), "eq4"),
    (("1.96", 10, "0.025", "0.8", 3), "eq7"),
    (("2.197", 10, "0.025", "0.8", 1), "eq10"),
]:
    show("raw_n " + lab, raw_n(*args))

# Table 1
n1, sd1, m1 = 204, mpf(10), mpf("1.96")
n2, sd2, m2 = 613, mpf(11), mpf("1.76")
n3 = n1 + n2
m3 = (n1 * m1 + n2 * m2) / n3
sd3 = (n1 * sd1 + n2 * sd2) / n3
show("post mean", m3)
show("post sd", sd3)
for lab, n, sd, m, k in [("prior", n1, sd1, m1, 3), ("study", n2, sd2, m2, 2), ("post", n3, sd3, m3, 2)]:
    sem = sd / sqrt(n)
    show(f"{lab} sem", sem)
    show(f"{lab} var of mean", sem ** 2)
    show(f"{lab} P", cdf(-m / sem))
    show(f"{lab} rep k", rep(m, sd, n, k, "0.025"))
    show(f"{lab} swap CL lo", m - mpf("1.96") * sem ** 2)
    show(f"{lab} swap CL hi", m + mpf("1.96") * sem ** 2)
    show(f"{lab} std CL lo", m - q975 * sem)
    show(f"{lab} std CL hi", m + q975 * sem)
# precision-weighted combination
w1, w2 = n1 / sd1 ** 2, n2 / sd2 ** 2
show("precision post mean", (w1 * m1 + w2 * m2) / (w1 + w2))
show("precision post sem", 1 / sqrt(w1 + w2))
show("precision post sd", sqrt(n3) / sqrt(w1 + w2))
# identical summaries: (100, 10, 2) + itself
show("self-combined P (200,10,2)", cdf(-2 / (10 / sqrt(200))))
show("self P (100,10,2)", cdf(-2))
# plot: area above marker C under sqrt2-widened curve
c = -quantile("0.025") * sqrt(2)
show("marker C", c)
show("area above 2.77 (1.96, sqrt2)", 1 - cdf((mpf("2.77") - mpf("1.96")) / sqrt(2)))
show("wilson z", q975)
