int nondet();
int main() {
  int i = 0;
  int m = nondet();
  while (i < 3) {
    if (m == i) {
      assert(m < 2);
    }
    i++;
  }
  return 0;
}
