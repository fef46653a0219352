//! Gnuplot script templates for the four figure families. Each script is
//! written next to the CSVs it plots.

pub const TRAJECTORY_GP: &str = r#"# Reference trajectory surface u^r(x,t)
set datafile separator ","
set xlabel "x"
set ylabel "t"
set zlabel "u^r"
set dgrid3d 40,40
set hidden3d
splot "ur_field.csv" using 2:1:3 every ::1 with lines title "u^r(x,t)"
pause -1
"#;

pub const TRACKING_GP: &str = r#"# Output tracking: u(1,t) against the reference
set datafile separator ","
set xlabel "t"
set ylabel "u(1,t)"
plot "scalars.csv" using 1:4 every ::1 with lines title "u(1,t)", \
     "scalars.csv" using 1:5 every ::1 with lines dashtype 2 title "u^r(1,t)"
pause -1
"#;

pub const DENSITY_GP: &str = r#"# Density evolution rho(x,t)
set datafile separator ","
set xlabel "x"
set ylabel "t"
set zlabel "rho"
set dgrid3d 40,40
set hidden3d
splot "fields.csv" using 2:1:4 every ::1 with lines title "rho(x,t)"
pause -1
"#;

pub const EFFORT_GP: &str = r#"# Control efforts; overlay the unilateral baseline when present
set datafile separator ","
set xlabel "t"
set ylabel "input"
plot "scalars.csv" using 1:2 every ::1 with lines title "U_0", \
     "scalars.csv" using 1:3 every ::1 with lines title "U_1", \
     "uni_scalars.csv" using 1:2 every ::1 with lines dashtype 3 title "U_0 (unilateral)", \
     "uni_scalars.csv" using 1:3 every ::1 with lines dashtype 3 title "U_1 (unilateral)"
pause -1
"#;
