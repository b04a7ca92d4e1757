# Cruise control test: three constant-throttle phases with the brake
# released. The nominal test holds half throttle for 30 s.

param th1 in [0, 1] nominal 0.5;
param th2 in [0, 1] nominal 0.5;
param th3 in [0, 1] nominal 0.5;

step 10 { throttle = const(th1); brake = const(0); }
step 10 { throttle = const(th2); brake = const(0); }
step 10 { throttle = const(th3); brake = const(0); }

assess always: speed <= 120;

table {
  row: throttle >= 0.9 => speed <= 120;
}
