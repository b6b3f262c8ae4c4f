// Single translation unit for the test framework implementation.
#include <catch2/catch_amalgamated.cpp>
