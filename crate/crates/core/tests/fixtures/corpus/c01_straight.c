int main() {
  int a = 1;
  int b = a + 2;
  assert(b == 3);
  return 0;
}
