double limitSpeedCommand(double requested_speed, double limit) {
  if (requested_speed < 0.0) {
    return 0.0;
  }
  return requested_speed > limit ? limit : requested_speed;
}
