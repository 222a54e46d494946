int main() {
  int x = 0;
  while (x < 3) {
    x = x + 1;
  }
  while (1) {
    x = x;
  }
  return 0;
}
