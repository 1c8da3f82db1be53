#include "sfqctl_app.hpp"

int main(int argc, char** argv) { return sfq::cli::run(argc, argv); }
