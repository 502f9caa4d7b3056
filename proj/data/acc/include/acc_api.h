#ifndef ACC_API_H
#define ACC_API_H

struct AccCommand {
  double throttle;  // [0, 1]
  double brake;     // [0, 1]
  bool emergency;
};

AccCommand computeAccCommand(double ego_speed, double ego_accel, double gap,
                             double relative_speed);

#endif
