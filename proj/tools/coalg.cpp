#include "coalg/cli/app.hpp"

int main( int argc, char** argv ) { return coalg::cli::run( argc, argv ); }
