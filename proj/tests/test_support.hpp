#pragma once

#include "sfq/transmon.hpp"

namespace testing_support {

/// Calibrated 5 GHz / 250 MHz transmon, built once per test binary.
inline const sfq::EigenModel& calibrated_model() {
  static const sfq::EigenModel model =
      sfq::build_model(sfq::calibrate(sfq::ghz(5.0), sfq::mhz(250.0)));
  return model;
}

}  // namespace testing_support
