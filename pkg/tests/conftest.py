from fractions import Fraction as F

from hypothesis import strategies as st

from gmoduli.exact import RatMatrix

rationals = st.builds(F, st.integers(-3, 3), st.sampled_from([1, 2, 3]))

ROT345 = RatMatrix.from_rows([[F(3, 5), F(-4, 5)], [F(4, 5), F(3, 5)]])
