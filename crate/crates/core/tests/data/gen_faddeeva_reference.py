"""Regenerate faddeeva_reference.csv: w(z) = exp(-z^2) erfc(-iz) at 60 digits.

Upper half-plane: 100 x 100 grid over x in [-12, 12], y in [0, 12].
Lower half-plane: 100 x 100 grid over x in [-12, 12], y in [-12, 0).
"""
import mpmath as mp

mp.mp.dps = 60


def w(z):
    return mp.exp(-z * z) * mp.erfc(-1j * z)


def main():
    # grid nodes are rounded to binary64 first so the Rust side sees the exact abscissae
    xs = [mp.mpf(float(-12 + 24 * i / 99)) for i in range(100)]
    upper = [mp.mpf(float(12 * j / 99)) for j in range(100)]
    lower = [mp.mpf(float(-12 + 12 * j / 100)) for j in range(100)]
    with open("faddeeva_reference.csv", "w", newline="\n") as f:
        f.write("half,x,y,re_w,im_w\n")
        for half, ys in (("upper", upper), ("lower", lower)):
            for y in ys:
                for x in xs:
                    v = w(mp.mpc(x, y))
                    f.write("%s,%s,%s,%s,%s\n" % (
                        half,
                        mp.nstr(x, 25, min_fixed=-1, max_fixed=-1),
                        mp.nstr(y, 25, min_fixed=-1, max_fixed=-1),
                        mp.nstr(v.real, 20, min_fixed=-1, max_fixed=-1),
                        mp.nstr(v.imag, 20, min_fixed=-1, max_fixed=-1)))


if __name__ == "__main__":
    main()
