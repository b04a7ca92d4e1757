# Water tank: valve opening held, then ramped. The level bound is
# violated by keeping the valve wide open.

param v1 in [0, 1] nominal 0.3;
param v2 in [0, 1] nominal 0.3;
param ramp_dur in [5, 20] nominal 10;

step 10 { inflow = const(v1); }
step ramp_dur { inflow = ramp(v1, v2); }

assess always: level <= 9;
