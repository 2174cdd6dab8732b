"""Monitored propagator on the toy corpus: the kernel as derived by
completing the square against the time-sliced integral, next to the
printed cross term.  The last column is their relative difference."""

from gravmeasure.checks import printed_form_table

print(f"{'scenario':<18} {'log|U| derived':>15} {'log|U| printed':>15} {'rel diff':>10}")
for row in printed_form_table():
    print(f"{row['scenario']:<18} {row['derived_log_magnitude']:15.8f} "
          f"{row['printed_log_magnitude']:15.8f} {row['relative_difference']:10.3e}")
