bool headwayTooShort(double speed, double gap, double min_gap, double min_headway) {
  const double dynamic = min_headway * speed;
  const double required = dynamic > min_gap ? dynamic : min_gap;
  return gap < required;
}
