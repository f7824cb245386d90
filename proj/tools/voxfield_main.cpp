#include <iostream>

int main() {
  std::cout << "voxfield: placeholder\n";
  return 0;
}
