using Microsoft.VisualStudio.TestTools.UnitTesting;

[TestClass]
public class TrueMstest
{
    [TestMethod]
    public void RoundTrips()
    {
        Assert.AreEqual("x", "x");
    }
}
